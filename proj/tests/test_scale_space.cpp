#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rgtn/scale_space.hpp"

using namespace rgtn;

namespace {

DenseTensor smooth_32x32() {
    DenseTensor x({32, 32});
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) x.at({i, j}) = std::sin(i / 8.0) * std::sin(j / 8.0);
    return x;
}

double round_trip_error(const DenseTensor& x, std::size_t s) {
    ScaleLevel level{s, {0, 1}};
    const auto back = upsample(coarse_grain(x, level), level, x.shape());
    return frobenius_norm(back - x) / frobenius_norm(x);
}

double mean(const DenseTensor& t) {
    double s = 0.0;
    for (double v : t.values()) s += v;
    return s / static_cast<double>(t.size());
}

}  // namespace

TEST(DefaultSpatialModes, SizeAtLeastSixteen) {
    EXPECT_EQ(default_spatial_modes({20, 32, 32, 3}), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_TRUE(default_spatial_modes({7, 8, 9, 15}).empty());
}

TEST(CoarseGrain, ConstantStaysConstant) {
    auto c = coarse_grain(DenseTensor::filled({17, 5, 32}, 2.5), {2, {0, 2}});
    EXPECT_EQ(c.shape(), (Shape{5, 5, 8}));
    for (double v : c.values()) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(CoarseGrain, WindowMeans) {
    auto c = coarse_grain(DenseTensor({4}, {1, 3, 5, 7}), {1, {0}});
    EXPECT_EQ(c.values(), (std::vector<double>{2, 6}));
    // Trailing partial window averages over its own size.
    auto p = coarse_grain(DenseTensor({5}, {1, 3, 5, 7, 10}), {1, {0}});
    EXPECT_EQ(p.values(), (std::vector<double>{2, 6, 10}));
}

TEST(CoarseGrain, LinearAndMeanPreserving) {
    std::mt19937_64 rng(1);
    ScaleLevel level{2, {0, 2}};
    auto x = oracle::random_tensor({16, 3, 8}, rng), y = oracle::random_tensor({16, 3, 8}, rng);
    auto lhs = coarse_grain(1.5 * x + (-0.5) * y, level);
    auto rhs = 1.5 * coarse_grain(x, level) + (-0.5) * coarse_grain(y, level);
    EXPECT_LT(frobenius_norm(lhs - rhs), 1e-12);
    EXPECT_NEAR(mean(coarse_grain(x, level)), mean(x), 1e-12);
}

TEST(CoarseGrainMask, MajorityRule) {
    auto all = coarse_grain_mask(DenseTensor::filled({8, 8}, 1.0), {1, {0, 1}});
    for (double v : all.values()) EXPECT_EQ(v, 1.0);
    auto none = coarse_grain_mask(DenseTensor::filled({8, 8}, 0.0), {1, {0, 1}});
    for (double v : none.values()) EXPECT_EQ(v, 0.0);
    auto m = coarse_grain_mask(DenseTensor({4}, {1, 0, 0, 0}), {1, {0}});
    EXPECT_EQ(m.values(), (std::vector<double>{1, 0}));
    EXPECT_THROW(coarse_grain_mask(DenseTensor({2}, {0.5, 1}), {1, {0}}), std::invalid_argument);
}

TEST(Upsample, ConstantAndMonotone) {
    ScaleLevel level{1, {0}};
    auto c = upsample(coarse_grain(DenseTensor::filled({9}, -1.25), level), level, {9});
    for (double v : c.values()) EXPECT_DOUBLE_EQ(v, -1.25);
    auto u = upsample(DenseTensor({2}, {2, 6}), level, {4});
    ASSERT_EQ(u.size(), 4u);
    EXPECT_DOUBLE_EQ(u[0], 2.0);
    EXPECT_DOUBLE_EQ(u[3], 6.0);
    for (std::size_t i = 0; i + 1 < 4; ++i) EXPECT_LT(u[i], u[i + 1]);
    EXPECT_THROW(upsample(DenseTensor({3}), level, {4}), ShapeError);
}

TEST(RoundTrip, SmoothTensorErrorShrinksTowardFineScales) {
    const auto x = smooth_32x32();
    const double e1 = round_trip_error(x, 1), e2 = round_trip_error(x, 2), e3 = round_trip_error(x, 3);
    EXPECT_LE(e1, 0.1);
    EXPECT_LT(e1, e2);
    EXPECT_LT(e2, e3);
    // Linear interpolation of mean-pooled smooth data loses accuracy roughly
    // quadratically in the window; the per-level growth stays below 4.
    EXPECT_LT(e2 / e1, 4.0);
    EXPECT_LT(e3 / e2, 4.0);
}

TEST(RefineNetwork, NoSpatialLegsUnchanged) {
    std::mt19937_64 rng(2);
    TNGraph g = TNGraph::one_per_mode({3, 4}, {{0, 1, 2, 0.3}},
                                      [&](NodeId, const Shape& s) { return oracle::random_tensor(s, rng); });
    ScaleLevel from{1, {}}, to{0, {}};
    TNGraph r = refine_network(g, from, to, {3, 4});
    for (NodeId n : g.node_ids()) EXPECT_EQ(r.core(n).tensor, g.core(n).tensor);
    EXPECT_EQ(r.diagonals(), g.diagonals());
    EXPECT_EQ(r.edge(0).gate_weight, g.edge(0).gate_weight);
}

TEST(RefineNetwork, SingleCoreMatchesUpsampledReconstruction) {
    TNGraph g(Shape{2});
    g.add_node(DenseTensor({2}, {1.0, 5.0}), {0});
    ScaleLevel from{1, {0}}, to{0, {0}};
    TNGraph r = refine_network(g, from, to, {4});
    EXPECT_EQ(r.core(0).tensor.shape(), (Shape{4}));
    const auto expect = upsample(reconstruct(g, 0.5), from, {4});
    EXPECT_LT(frobenius_norm(reconstruct(r, 0.5) - expect), 1e-10);
}

TEST(RefineNetwork, NetworkReconstructionCommutesWithUpsampling) {
    std::mt19937_64 rng(3);
    const Shape base{20, 3, 17};
    ScaleLevel from{2, {0, 2}}, mid{1, {0, 2}};
    TNGraph g = TNGraph::one_per_mode(pooled_shape(base, from), {{0, 1, 2, 0.7}, {1, 2, 3, -0.2}, {0, 2, 2, 1.0}},
                                      [&](NodeId, const Shape& s) { return oracle::random_tensor(s, rng); });
    g.diagonal(0, 0) = {0.5, 2.0};
    TNGraph r = refine_network(g, from, mid, base);
    EXPECT_EQ(r.external_shape(), pooled_shape(base, mid));
    EXPECT_EQ(r.diagonals(), g.diagonals());
    for (EdgeId e : g.edge_ids()) {
        EXPECT_EQ(r.edge(e).bond_dim, g.edge(e).bond_dim);
        EXPECT_EQ(r.edge(e).gate_weight, g.edge(e).gate_weight);
    }
    // One refinement step is a window-2 upsample of the coarse reconstruction.
    ScaleLevel step{1, {0, 2}};
    const auto expect = upsample(reconstruct(g, 0.5), step, r.external_shape());
    EXPECT_LT(oracle::rel_diff(reconstruct(r, 0.5), expect), 1e-10);
    EXPECT_THROW(refine_network(g, from, {0, {0, 2}}, base), std::invalid_argument);
}
