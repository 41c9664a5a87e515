#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rgtn/discovery.hpp"

using namespace rgtn;

namespace {

StructureSignature sig(std::size_t nodes, std::map<std::pair<NodeId, NodeId>, std::size_t> ranks) {
    StructureSignature s;
    s.node_count = nodes;
    s.ranks = std::move(ranks);
    for (std::size_t n = 0; n < nodes; ++n) s.physical[int(n)] = {n};
    return s;
}

TruthSpec easy_spec() {
    TruthSpec s;
    s.dims = {3, 4};
    s.edges = {{0, 1}};
    s.bond_min = s.bond_max = 2;
    s.seed = 5;
    return s;
}

RGConfig easy_config() {
    RGConfig cfg;
    cfg.init = InitTopology::FullyConnected;
    cfg.init_bond = 2;
    cfg.eta0_cores = 0.05;
    cfg.eta0_struct = 0.005;
    cfg.epochs_initial = 300;
    cfg.epochs_compress = 100;
    cfg.expand_steps = 0;
    return cfg;
}

}  // namespace

TEST(Compare, ReflexiveOnRandomSignatures) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        const auto g = oracle::random_graph(2 + i % 4, rng, 3, 3, 0.6);
        const auto s = harden(g, 1e-2, 0.5, 1.0);
        EXPECT_TRUE(compare(s, s, 0));
    }
}

TEST(Compare, RankToleranceIsSymmetric) {
    const auto truth = sig(3, {{{0, 1}, 3}, {{1, 2}, 2}});
    EXPECT_TRUE(compare(sig(3, {{{0, 1}, 4}, {{1, 2}, 2}}), truth, 1));
    EXPECT_TRUE(compare(sig(3, {{{0, 1}, 2}, {{1, 2}, 2}}), truth, 1));
    EXPECT_FALSE(compare(sig(3, {{{0, 1}, 4}, {{1, 2}, 2}}), truth, 0));
    EXPECT_FALSE(compare(sig(3, {{{0, 1}, 5}, {{1, 2}, 2}}), truth, 1));
    EXPECT_FALSE(compare(sig(3, {{{0, 1}, 3}, {{1, 2}, 4}}), truth, 1));
}

TEST(Compare, AdjacencyMustMatch) {
    const auto truth = sig(3, {{{0, 1}, 2}, {{1, 2}, 2}});
    EXPECT_FALSE(compare(sig(3, {{{0, 1}, 2}}), truth, 1));
    EXPECT_FALSE(compare(sig(3, {{{0, 1}, 2}, {{1, 2}, 2}, {{0, 2}, 2}}), truth, 1));
    EXPECT_FALSE(compare(sig(3, {{{0, 2}, 2}, {{1, 2}, 2}}), truth, 1));
    // A rank-1 bond carries no correlation and counts as absent.
    EXPECT_TRUE(compare(sig(3, {{{0, 1}, 2}, {{1, 2}, 2}, {{0, 2}, 1}}), truth, 0));
}

TEST(Compare, NodesIdentifiedByPhysicalModes) {
    const auto truth = sig(3, {{{0, 1}, 2}, {{1, 2}, 3}});
    // Same structure with node ids permuted.
    StructureSignature found;
    found.node_count = 3;
    found.physical = {{7, {0}}, {4, {1}}, {9, {2}}};
    found.ranks = {{{4, 7}, 2}, {{4, 9}, 3}};
    EXPECT_TRUE(compare(found, truth, 0));
    // An extra internal node never matches.
    found.node_count = 4;
    found.physical[12] = {};
    EXPECT_FALSE(compare(found, truth, 1));
    EXPECT_FALSE(compare(sig(2, {{{0, 1}, 2}}), truth, 1));
}

TEST(TrialSeed, DeterministicAndDistinct) {
    std::set<std::uint64_t> seen;
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t t = 0; t < 20; ++t) {
            EXPECT_EQ(trial_seed(3, s, t), trial_seed(3, s, t));
            seen.insert(trial_seed(3, s, t));
        }
    EXPECT_EQ(seen.size(), 100u);
    EXPECT_NE(trial_seed(3, 0, 0), trial_seed(4, 0, 0));
}

TEST(WithFreshCores, KeepsStructureChangesValues) {
    const TNGraph g = gen_structure(preset("ring", 1));
    const TNGraph h = with_fresh_cores(g, 99);
    EXPECT_EQ(harden(g, 1e-2, 0.5, kRealizeTemperature), harden(h, 1e-2, 0.5, kRealizeTemperature));
    for (NodeId n : g.node_ids()) {
        EXPECT_EQ(g.core(n).tensor.shape(), h.core(n).tensor.shape());
        EXPECT_NE(g.core(n).tensor.values(), h.core(n).tensor.values());
    }
    EXPECT_EQ(with_fresh_cores(g, 99).core(0).tensor.values(), h.core(0).tensor.values());
}

TEST(SuccessRate, TrivialSpecAlwaysRecovered) {
    RevealOptions opt;
    opt.trials = 10;
    const auto res = success_rate({{"pair", easy_spec()}}, opt, easy_config());
    ASSERT_EQ(res.size(), 1u);
    EXPECT_EQ(res[0].matches, 10u);
    EXPECT_DOUBLE_EQ(res[0].fraction, 1.0);
    for (const auto& o : res[0].outcomes) {
        EXPECT_TRUE(o.error.empty()) << o.error;
        EXPECT_EQ(o.matched, compare(o.found, o.truth, opt.rank_tol));
    }
}

TEST(SuccessRate, ReproducibleAcrossWorkerCounts) {
    RevealOptions opt;
    opt.trials = 3;
    opt.master_seed = 17;
    auto cfg = easy_config();
    cfg.epochs_initial = 60;
    cfg.epochs_compress = 20;
    const std::vector<std::pair<std::string, TruthSpec>> specs{{"pair", easy_spec()}, {"chain", preset("chain", 2)}};
    const auto a = success_rate(specs, opt, cfg);
    opt.workers = 3;
    std::size_t callbacks = 0;
    const auto b = success_rate(specs, opt, cfg, [&](const std::string&, const TrialOutcome&) { ++callbacks; });
    EXPECT_EQ(callbacks, 6u);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].matches, b[i].matches);
        for (std::size_t t = 0; t < opt.trials; ++t) {
            EXPECT_EQ(a[i].outcomes[t].seed, b[i].outcomes[t].seed);
            EXPECT_EQ(a[i].outcomes[t].found, b[i].outcomes[t].found);
            EXPECT_EQ(a[i].outcomes[t].re_final, b[i].outcomes[t].re_final);
        }
    }
}

TEST(SuccessRate, WeaklyIncreasingInRankTolerance) {
    RevealOptions opt;
    opt.trials = 2;
    auto cfg = easy_config();
    cfg.epochs_initial = 60;
    cfg.epochs_compress = 20;
    opt.rank_tol = 0;
    const auto strict = success_rate({{"chain", preset("chain", 3)}}, opt, cfg);
    for (const auto& o : strict[0].outcomes) {
        EXPECT_LE(compare(o.found, o.truth, 0), compare(o.found, o.truth, 1));
        EXPECT_LE(compare(o.found, o.truth, 1), compare(o.found, o.truth, 2));
    }
    opt.rank_tol = 1;
    EXPECT_GE(success_rate({{"chain", preset("chain", 3)}}, opt, cfg)[0].matches, strict[0].matches);
}

TEST(SuccessRate, RejectsZeroTrials) {
    RevealOptions opt;
    opt.trials = 0;
    EXPECT_THROW(success_rate({{"pair", easy_spec()}}, opt, easy_config()), std::invalid_argument);
}

TEST(Tables, SuccessTableAndTrialLog) {
    SpecResult r;
    r.name = "ring";
    r.trials = 2;
    r.matches = 1;
    r.fraction = 0.5;
    TrialOutcome o;
    o.trial = 1;
    o.seed = 42;
    o.found = sig(2, {{{0, 1}, 3}});
    o.truth = o.found;
    o.matched = true;
    r.outcomes = {o};
    std::ostringstream table, log;
    write_success_table(table, {r});
    EXPECT_EQ(table.str(), "spec,trials,matches,fraction\nring,2,1,0.5\n");
    write_trial_log(log, {r});
    EXPECT_NE(log.str().find("ring,1,42,1,"), std::string::npos);
    EXPECT_NE(log.str().find("nodes=2 edges=0-1:3"), std::string::npos);
}
