#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rgtn/metrics.hpp"
#include "rgtn/synthgen.hpp"
#include "rgtn/trals.hpp"

using namespace rgtn;

namespace {

// Exact tensor ring with all ranks 2.
DenseTensor exact_ring(const Shape& dims, std::uint64_t seed) {
    TruthSpec s;
    s.dims = dims;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) s.edges.push_back({int(k), int(k + 1)});
    s.edges.push_back({0, int(dims.size() - 1)});
    s.bond_min = s.bond_max = 2;
    s.seed = seed;
    return realize(gen_structure(s));
}

}  // namespace

TEST(RingSpec, Validation) {
    EXPECT_NO_THROW(RingSpec::uniform(4, 2).validate(4));
    EXPECT_THROW(RingSpec::uniform(2, 2).validate(2), std::invalid_argument);
    EXPECT_THROW(RingSpec::uniform(3, 2).validate(4), std::invalid_argument);
    EXPECT_THROW(RingSpec::uniform(4, 0).validate(4), std::invalid_argument);
    auto s = RingSpec::uniform(4, 2);
    s.max_iters = 0;
    EXPECT_THROW(s.validate(4), std::invalid_argument);
}

TEST(TrAls, RecoversExactRingsToHighAccuracy) {
    // ALS has genuine local minima, so this is a rate over fixed instances.
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = exact_ring({6, 7, 8, 6}, seed);
        auto spec = RingSpec::uniform(4, 2);
        spec.max_iters = 50;
        spec.tol = 0.0;
        const auto r = tr_als(x, std::nullopt, spec, seed + 10);
        EXPECT_LE(r.sweeps, 50u);
        EXPECT_FALSE(r.aborted);
        recovered += r.eval.re <= 1e-6;
    }
    EXPECT_GE(recovered, 18);
}

TEST(TrAls, RandomInitAlsoRecoversExactRing) {
    const auto x = exact_ring({6, 7, 8, 6}, 0);
    auto spec = RingSpec::uniform(4, 2);
    spec.init = RingInit::Random;
    spec.max_iters = 200;
    spec.tol = 0.0;
    EXPECT_LE(tr_als(x, std::nullopt, spec, 3).eval.re, 1e-6);
}

TEST(TrAls, TraceNonIncreasingWithFullMask) {
    std::mt19937_64 rng(4);
    const auto x = oracle::random_tensor({5, 4, 6, 3}, rng);
    auto spec = RingSpec::uniform(4, 3);
    spec.max_iters = 40;
    spec.tol = 0.0;
    const auto r = tr_als(x, std::nullopt, spec, 1);
    ASSERT_GE(r.trace.size(), 10u);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-10) << i;
}

TEST(TrAls, RankOneHasLessCapacity) {
    const auto x = exact_ring({4, 5, 3, 4}, 2);
    auto one = RingSpec::uniform(4, 1), two = RingSpec::uniform(4, 2);
    one.max_iters = two.max_iters = 50;
    EXPECT_GT(tr_als(x, std::nullopt, one, 0).eval.re, tr_als(x, std::nullopt, two, 0).eval.re);
}

TEST(TrAls, GraphReconstructsThroughSharedEngine) {
    const auto x = exact_ring({3, 4, 5}, 1);
    RingSpec spec;
    spec.ranks = {2, 3, 2};
    spec.max_iters = 20;
    const auto r = tr_als(x, std::nullopt, spec, 3);
    EXPECT_NO_THROW(r.ring.validate());
    EXPECT_EQ(r.ring.edge_ids().size(), 3u);
    EXPECT_NEAR(relative_error(x, reconstruct(r.ring, 1.0)), r.eval.re, 1e-9);
    EXPECT_LE(oracle::rel_diff(reconstruct(r.ring, 1.0), oracle::naive_reconstruct(r.ring, 1.0)), 1e-10);
    // Parameters: sum over cores of R_{k-1} I_k R_k.
    const double params = 2.0 * 3 * 2 + 2.0 * 4 * 3 + 3.0 * 5 * 2;
    EXPECT_NEAR(r.eval.cr_percent, 100.0 * params / 60.0, 1e-12);
}

TEST(TrAls, MaskedFitCompletesExactRing) {
    const auto x = exact_ring({6, 5, 6, 5}, 3);
    const auto mask = gen_mask(x.shape(), 0.5, 8);
    auto spec = RingSpec::uniform(4, 2);
    spec.max_iters = 200;
    spec.tol = 1e-12;
    const auto r = tr_als(x, mask, spec, 5);
    EXPECT_LE(r.eval.re, 1e-4);
    EXPECT_LE(relative_error(x, reconstruct(r.ring, 1.0)), 1e-3);
}

TEST(TrAls, DeterministicGivenSeed) {
    std::mt19937_64 rng(9);
    const auto x = oracle::random_tensor({3, 4, 3}, rng);
    auto spec = RingSpec::uniform(3, 2);
    spec.max_iters = 5;
    const auto a = tr_als(x, std::nullopt, spec, 7), b = tr_als(x, std::nullopt, spec, 7);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(reconstruct(a.ring, 1.0).values(), reconstruct(b.ring, 1.0).values());
}

TEST(TrAls, RejectsMismatchedMask) {
    const auto x = exact_ring({3, 4, 5}, 0);
    EXPECT_THROW(tr_als(x, DenseTensor({3, 4}), RingSpec::uniform(3, 2), 0), ShapeError);
}

TEST(RankSchedule, StopsAtFirstRankMeetingBound) {
    const auto x = exact_ring({6, 7, 8, 6}, 0);
    RingSpec base;
    base.max_iters = 100;
    base.tol = 1e-12;
    const auto r = tr_als_rank_schedule(x, std::nullopt, 1e-4, 4, base, 10);
    EXPECT_TRUE(r.met);
    EXPECT_EQ(r.rank, 2u);
    ASSERT_EQ(r.tried.size(), 2u);
    EXPECT_EQ(r.tried[0].first, 1u);
    EXPECT_GT(r.tried[0].second, 1e-4);

    const auto miss = tr_als_rank_schedule(x, std::nullopt, 0.0, 1, base, 10);
    EXPECT_FALSE(miss.met);
    EXPECT_EQ(miss.rank, 1u);
}
