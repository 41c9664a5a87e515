#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rgtn/metrics.hpp"

using namespace rgtn;

TEST(RelativeError, KnownValues) {
    const auto a = DenseTensor({2, 2}, {3, 0, 0, 4});
    const auto b = DenseTensor({2, 2}, {3, 0, 0, 0});
    EXPECT_DOUBLE_EQ(relative_error(a, b), 0.8);
    EXPECT_DOUBLE_EQ(relative_error(a, a), 0.0);
    EXPECT_THROW(relative_error(DenseTensor({2, 2}), a), std::invalid_argument);
    EXPECT_THROW(relative_error(a, DenseTensor({4})), ShapeError);
}

TEST(Psnr, MatchesClosedForm) {
    DenseTensor a({10, 10}), b({10, 10});
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = static_cast<double>(i);
        b[i] = a[i] + (i % 2 ? 5.0 : -5.0);
    }
    EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(255.0 * 255.0 / 25.0), 1e-12);
    EXPECT_NEAR(psnr(a, b, 1.0), 10.0 * std::log10(1.0 / 25.0), 1e-12);
    EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Mpsnr, AveragesFramesAlongTemporalMode) {
    std::mt19937_64 rng(2);
    const auto truth = oracle::random_tensor({3, 4, 5}, rng);
    DenseTensor est = truth;
    // Frame t of mode 1 gets a uniform offset of t (frame 0 exact).
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t k = 0; k < 5; ++k) est.at({i, t, k}) += static_cast<double>(t);
    const auto r = mpsnr(truth, est, 1);
    ASSERT_EQ(r.per_frame.size(), 4u);
    EXPECT_TRUE(std::isinf(r.per_frame[0]));
    EXPECT_EQ(r.infinite_frames, 1u);
    double expect = 0.0;
    for (int t = 1; t < 4; ++t) {
        const double f = 10.0 * std::log10(255.0 * 255.0 / (t * t));
        EXPECT_NEAR(r.per_frame[t], f, 1e-9);
        expect += f / 3.0;
    }
    EXPECT_NEAR(r.mean_db, expect, 1e-9);
    EXPECT_TRUE(std::isinf(mpsnr(truth, truth, 0).mean_db));
    EXPECT_THROW(mpsnr(truth, est, 3), ShapeError);
}

TEST(RescaleToPeak, MapsTruthRangeOntoPeak) {
    const auto t = DenseTensor({4}, {-1, 0, 1, 3});
    const auto e = DenseTensor({4}, {-1, 1, 1, 3});
    const auto [rt, re] = rescale_to_peak(t, e);
    EXPECT_DOUBLE_EQ(rt[0], 0.0);
    EXPECT_DOUBLE_EQ(rt[3], 255.0);
    EXPECT_DOUBLE_EQ(re[1], 127.5);
    // The PSNR of the rescaled pair equals the PSNR at peak = range.
    EXPECT_NEAR(psnr(rt, re), psnr(t, e, 4.0), 1e-9);
}

TEST(ResultRows, FormatAndAppend) {
    ResultRow row{"rgtn", "order6", 0.01, 0.76, 0.0099, std::nullopt, 12.5};
    EXPECT_EQ(format_row(row), "rgtn,order6,0.01,0.76,0.0099,,12.5");
    row.mpsnr = 31.25;
    EXPECT_EQ(format_row(row), "rgtn,order6,0.01,0.76,0.0099,31.25,12.5");
    row.dataset = "a,b";
    EXPECT_THROW(format_row(row), std::invalid_argument);

    const auto path = std::filesystem::temp_directory_path() / "rgtn_metrics_rows.csv";
    std::filesystem::remove(path);
    row.dataset = "video";
    append_result(path, row);
    append_result(path, row);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string line = format_row(row);
    EXPECT_EQ(ss.str(), std::string(kResultsHeader) + "\n" + line + "\n" + line + "\n");
    std::filesystem::remove(path);
}
