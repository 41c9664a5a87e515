#pragma once
// Run configuration for the command-line tool: a JSON tree whose every key
// has a default, so partial files are valid and unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgtn/discovery.hpp"
#include "rgtn/rg_search.hpp"
#include "rgtn/synthgen.hpp"
#include "rgtn/trals.hpp"

namespace rgtn {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct InputPaths {
    std::string tensor;
    std::string mask;
    /// Ground truth used only for evaluation (completion metrics).
    std::string truth;
};

struct SynthSettings {
    /// Named preset; when empty, dims/edges/bond range below are used.
    std::string preset = "order6";
    Shape dims;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t bond_min = 2;
    std::size_t bond_max = 3;
    double missing_fraction = 0.0;
    double noise_fraction = 0.0;

    TruthSpec truth_spec(std::uint64_t seed) const;
};

struct EvalSettings {
    double re_bound = 0.01;
    /// Largest initial bond the search may escalate to when chasing re_bound;
    /// equal to search.init_bond disables escalation.
    std::size_t max_bond = 6;
    std::optional<std::size_t> temporal_mode;
    double peak = 255.0;
};

struct TralsSettings {
    /// Fixed ranks; empty means the uniform-rank schedule up to max_rank.
    std::vector<std::size_t> ranks;
    std::size_t max_rank = 8;
    std::size_t max_iters = 100;
    double tol = 1e-8;
    double ridge = 1e-8;
    RingInit init = RingInit::Svd;
};

struct RevealSettings {
    std::vector<std::string> specs = reveal_topologies();
    std::size_t trials = 20;
    std::size_t rank_tol = 1;
    double noise_fraction = 0.0;
};

struct CompareSettings {
    std::vector<std::string> methods{"rgtn", "trals"};
    std::vector<double> re_bounds{0.01};
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::string out = "out";
    std::size_t workers = 1;
    /// Dataset label in results rows; empty means derived from the input.
    std::string dataset;
    InputPaths input;
    SynthSettings synth;
    RGConfig search;
    TralsSettings trals;
    RevealSettings reveal;
    CompareSettings compare;
    EvalSettings eval;

    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys and type mismatches throw
/// ConfigError naming the offending path.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(RingInit i);
RingInit parse_ring_init(const std::string& s);

}  // namespace rgtn
