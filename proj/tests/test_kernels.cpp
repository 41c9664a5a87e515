#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rgtn/kernels.hpp"

namespace k = rgtn::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

class KernelEquivalence : public ::testing::Test {
protected:
    void SetUp() override {
        simd_ = k::avx2_table();
        if (!simd_) GTEST_SKIP() << "no AVX2 variant on this machine";
    }
    const k::KernelTable& ref_ = k::scalar_table();
    const k::KernelTable* simd_ = nullptr;
    std::mt19937_64 rng_{42};
};

// Lengths that exercise the vector body, the unrolled body and every tail.
const std::size_t kLengths[] = {0, 1, 3, 4, 7, 8, 9, 15, 16, 17, 31, 64, 101, 1000};

}  // namespace

TEST_F(KernelEquivalence, DotAndSumsq) {
    for (std::size_t n : kLengths) {
        auto a = random_vec(n, rng_), b = random_vec(n, rng_);
        const double r = ref_.dot(a.data(), b.data(), n);
        EXPECT_NEAR(simd_->dot(a.data(), b.data(), n), r, 1e-12 * (1.0 + std::abs(r) + n)) << n;
        const double s = ref_.sumsq(a.data(), n);
        EXPECT_NEAR(simd_->sumsq(a.data(), n), s, 1e-12 * (1.0 + s)) << n;
    }
}

TEST_F(KernelEquivalence, AxpyScaleRotate) {
    for (std::size_t n : kLengths) {
        auto x = random_vec(n, rng_), y = random_vec(n, rng_);
        auto y1 = y, y2 = y;
        ref_.axpy(0.37, x.data(), y1.data(), n);
        simd_->axpy(0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14);

        auto s1 = x, s2 = x;
        ref_.scale(-1.7, s1.data(), n);
        simd_->scale(-1.7, s2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(s1[i], s2[i]);

        auto rx1 = x, ry1 = y, rx2 = x, ry2 = y;
        const double c = std::cos(0.3), s = std::sin(0.3);
        ref_.rotate(rx1.data(), ry1.data(), n, c, s);
        simd_->rotate(rx2.data(), ry2.data(), n, c, s);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(rx1[i], rx2[i], 1e-14);
            EXPECT_NEAR(ry1[i], ry2[i], 1e-14);
        }
    }
}

TEST_F(KernelEquivalence, Gemm) {
    const std::size_t dims[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 8, 8}, {5, 9, 17}, {13, 6, 33}, {32, 32, 32}, {7, 1, 9}};
    for (const auto& d : dims) {
        const auto [m, kk, n] = std::tuple{d[0], d[1], d[2]};
        auto a = random_vec(m * kk, rng_), b = random_vec(kk * n, rng_);
        std::vector<double> c1(m * n, 99.0), c2(m * n, -99.0);
        ref_.gemm(m, kk, n, a.data(), b.data(), c1.data());
        simd_->gemm(m, kk, n, a.data(), b.data(), c2.data());
        for (std::size_t i = 0; i < m * n; ++i) EXPECT_NEAR(c1[i], c2[i], 1e-12 * (1.0 + kk)) << m << "x" << kk << "x" << n;
    }
}

TEST_F(KernelEquivalence, Adam) {
    for (std::size_t n : kLengths) {
        auto p = random_vec(n, rng_), g = random_vec(n, rng_);
        auto m = random_vec(n, rng_), v = random_vec(n, rng_);
        for (auto& x : v) x = std::abs(x);
        auto p1 = p, m1 = m, v1 = v, p2 = p, m2 = m, v2 = v;
        ref_.adam(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-2, 0.9, 0.999, 1e-8, 0.19, 0.002);
        simd_->adam(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-2, 0.9, 0.999, 1e-8, 0.19, 0.002);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(p1[i], p2[i], 1e-14);
            EXPECT_NEAR(m1[i], m2[i], 1e-15);
            EXPECT_NEAR(v1[i], v2[i], 1e-15);
        }
    }
}

TEST(KernelDispatch, BackendCanBePinned) {
    const auto original = k::active_backend();
    ASSERT_TRUE(k::set_backend(k::Backend::Scalar));
    EXPECT_EQ(k::active_backend(), k::Backend::Scalar);
    EXPECT_EQ(&k::active(), &k::scalar_table());
    if (k::avx2_table()) {
        ASSERT_TRUE(k::set_backend(k::Backend::Avx2));
        EXPECT_EQ(&k::active(), k::avx2_table());
    } else {
        EXPECT_FALSE(k::set_backend(k::Backend::Avx2));
    }
    k::set_backend(original);
}

TEST(KernelScalar, GemmAgainstTripleLoop) {
    std::mt19937_64 rng(7);
    const std::size_t m = 6, kk = 4, n = 5;
    auto a = random_vec(m * kk, rng), b = random_vec(kk * n, rng);
    std::vector<double> c(m * n);
    k::scalar_table().gemm(m, kk, n, a.data(), b.data(), c.data());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
            EXPECT_NEAR(c[i * n + j], s, 1e-13);
        }
}
