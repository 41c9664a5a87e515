#pragma once
// Ground-truth structure comparison and the repeated-trial success-rate
// harness for structure revealing.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgtn/rg_search.hpp"
#include "rgtn/synthgen.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

/// True iff both signatures have the same nodes (identified by their
/// physical modes), the same adjacency over edges of rank >= 2, and every
/// edge rank within rank_tol of the truth. Nodes without physical legs in
/// `found` never match.
bool compare(const StructureSignature& found, const StructureSignature& truth, std::size_t rank_tol);

struct TrialOutcome {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    StructureSignature found;
    StructureSignature truth;
    bool matched = false;
    double re_final = 0.0;
    double seconds = 0.0;
    std::string error;  // non-empty when the run failed
};

struct SpecResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t matches = 0;
    double fraction = 0.0;
    std::vector<TrialOutcome> outcomes;
};

struct RevealOptions {
    std::size_t trials = 20;
    std::size_t rank_tol = 1;
    std::size_t workers = 1;
    /// Noise norm as a fraction of the clean tensor's norm.
    double noise_fraction = 0.0;
    std::uint64_t master_seed = 0;
};

/// Redraws the core values of g from `seed`, keeping topology and ranks.
TNGraph with_fresh_cores(const TNGraph& g, std::uint64_t seed);

/// Seed of trial `trial` of spec `spec_index`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t spec_index, std::size_t trial);

using TrialCallback = std::function<void(const std::string& spec, const TrialOutcome&)>;

/// For each named truth spec: fixed topology and ranks, fresh cores per
/// trial, full observation; runs rg_search, hardens and compares.
std::vector<SpecResult> success_rate(const std::vector<std::pair<std::string, TruthSpec>>& specs,
                                     const RevealOptions& opt, const RGConfig& cfg,
                                     const TrialCallback& on_trial = {});

/// "spec,trials,matches,fraction" rows with a header.
void write_success_table(std::ostream& os, const std::vector<SpecResult>& results);
void write_trial_log(std::ostream& os, const std::vector<SpecResult>& results);
std::string signature_to_string(const StructureSignature& s);

}  // namespace rgtn
