#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rgtn/config.hpp"

using namespace rgtn;
using nlohmann::json;

TEST(Config, DefaultsMatchReferenceSchedules) {
    const RunConfig c;
    EXPECT_DOUBLE_EQ(c.search.eta0_cores, 0.001);
    EXPECT_DOUBLE_EQ(c.search.s0, 2.0);
    EXPECT_DOUBLE_EQ(c.search.eta0_struct, 0.0001);
    EXPECT_DOUBLE_EQ(c.search.s1, 3.0);
    EXPECT_DOUBLE_EQ(c.search.tau0, 0.5);
    EXPECT_DOUBLE_EQ(c.search.t0, 100.0);
    EXPECT_DOUBLE_EQ(c.search.tension_percentile, 80.0);
    EXPECT_DOUBLE_EQ(c.search.flow_percentile, 20.0);
    EXPECT_DOUBLE_EQ(c.search.couplings.gamma, 0.01);
    EXPECT_DOUBLE_EQ(c.search.couplings.delta, 0.001);
    EXPECT_DOUBLE_EQ(c.search.couplings.epsilon, 0.1);
    EXPECT_EQ(c.synth.preset, "order6");
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, EmittedTreeRoundTrips) {
    RunConfig c;
    c.seed = 42;
    c.search.scales = 2;
    c.search.init = InitTopology::FullyConnected;
    c.search.smoothness.temporal = 0;
    c.search.smoothness.spatial = std::array<std::size_t, 2>{1, 2};
    c.search.spatial_modes = std::vector<std::size_t>{1, 2};
    c.search.couplings.tnn_mode_weights = {0.5, 0.25, 0.25};
    c.search.split_max_rank = 4;
    c.synth.preset = "";
    c.synth.dims = {3, 4, 5};
    c.synth.edges = {{0, 1}, {1, 2}};
    c.trals.ranks = {2, 2, 2};
    c.trals.init = RingInit::Random;
    c.eval.temporal_mode = 0;
    const json j = to_json(c);
    EXPECT_EQ(to_json(config_from_json(j)), j);
    EXPECT_EQ(to_json(config_from_json(to_json(RunConfig{}))), to_json(RunConfig{}));
}

TEST(Config, PartialTreesKeepDefaults) {
    const auto c = config_from_json(json::parse(R"({"search": {"scales": 2, "couplings": {"alpha": 0.5}}})"));
    EXPECT_EQ(c.search.scales, 2u);
    EXPECT_DOUBLE_EQ(c.search.couplings.alpha, 0.5);
    EXPECT_DOUBLE_EQ(c.search.couplings.gamma, 0.01);
    EXPECT_EQ(c.search.epochs_initial, RGConfig{}.epochs_initial);
    EXPECT_EQ(config_from_json(json::object()).out, "out");
}

TEST(Config, UnknownKeysRejectedWithPath) {
    try {
        config_from_json(json::parse(R"({"search": {"couplings": {"zeta": 1}}})"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("search.couplings.zeta"), std::string::npos) << e.what();
    }
    EXPECT_THROW(config_from_json(json::parse(R"({"sede": 1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"eval": {"peek": 1}})")), ConfigError);
}

TEST(Config, TypeMismatchesRejected) {
    EXPECT_THROW(config_from_json(json::parse(R"({"seed": "one"})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"seed": -1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": {"tabu": 1}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": {"eta0_cores": true}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": 3})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": {"init": "star"}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"trals": {"init": "qr"}})")), ConfigError);
}

TEST(Config, SemanticValidation) {
    EXPECT_THROW(config_from_json(json::parse(R"({"compare": {"methods": ["rgtn", "tnls"]}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"synth": {"dims": [3, 3, 3]}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"synth": {"missing_fraction": 1.0}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": {"eta0_cores": 0}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"workers": 0})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"search": {"init_bond": 7}})")), ConfigError);
    const auto c = config_from_json(
        json::parse(R"({"synth": {"preset": "", "dims": [3, 4, 5], "edges": [[0, 1], [1, 2]]}})"));
    EXPECT_EQ(c.synth.truth_spec(5).edges.size(), 2u);
    EXPECT_EQ(c.synth.truth_spec(5).seed, 5u);
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "rgtn_config_test.json";
    {
        std::ofstream os(path);
        os << R"({"seed": 9, "reveal": {"trials": 3}})";
    }
    const auto c = load_config(path);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.reveal.trials, 3u);
    {
        std::ofstream os(path);
        os << "{not json";
    }
    EXPECT_THROW(load_config(path), ConfigError);
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path), ConfigError);
}
