#pragma once
// Multi-scale structure search: node tension and edge information flow
// drive split and compression proposals, each judged by the total loss
// after a short Adam run, from the coarsest scale down to the data scale.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rgtn/objective.hpp"
#include "rgtn/scale_space.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

enum class InitTopology { Ring, Chain, FullyConnected };

enum class CompressionStrategy {
    /// edge_truncate with the configured SVD threshold.
    Threshold,
    /// Remove the edge outright; if that is rejected and the bond exceeds 2,
    /// try the bond reduced by one.
    DropThenDecrement,
};

struct RGConfig {
    std::size_t scales = 0;
    std::size_t expand_steps = 20;
    std::size_t compress_steps = 20;
    std::size_t epochs_initial = 100;
    std::size_t epochs_expand = 30;
    std::size_t epochs_compress = 30;
    std::size_t epochs_refine = 100;

    double eta0_cores = 1e-3;
    double s0 = 2.0;
    double eta0_struct = 1e-4;
    double s1 = 3.0;
    double tau0 = 0.5;
    double t0 = 100.0;
    double tau_floor = 1e-3;

    double svd_threshold = 1e-2;
    std::optional<std::size_t> split_max_rank;
    double tension_percentile = 80.0;
    double flow_percentile = 20.0;
    double eps_diag = 1e-2;
    double delta_gate = 0.5;
    std::uint64_t seed = 0;

    InitTopology init = InitTopology::Ring;
    std::size_t init_bond = 2;
    CompressionStrategy compression = CompressionStrategy::DropThenDecrement;
    /// Skip (edge, bond) pairs whose compression was already rejected.
    bool tabu = true;
    /// Independent searches from differently seeded initial networks; the
    /// run with the lowest final loss wins. Ignored when an initial network
    /// is supplied.
    std::size_t restarts = 1;

    CouplingConstants couplings;
    SmoothnessModes smoothness;
    /// Modes pooled by the scale transformation; unset means modes of size >= 16.
    std::optional<std::vector<std::size_t>> spatial_modes;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
};

/// Linear-interpolation percentile (p in [0, 100]) of a non-empty list.
double percentile(std::vector<double> values, double p);

std::pair<double, double> learning_rates(std::size_t s, const RGConfig& cfg);
double temperature(std::uint64_t t, const RGConfig& cfg);

std::map<NodeId, double> node_tension(const TNGraph& g, const GradientBundle& data_grad);
double schmidt_entropy(const TNGraph& g, EdgeId e);
std::map<EdgeId, double> edge_flow(const TNGraph& g, double tau);

/// Highest-tension splittable node, if it strictly exceeds the percentile of
/// all tensions.
std::optional<NodeId> propose_expansion(const TNGraph& g, const std::map<NodeId, double>& tensions,
                                        double pct = 80.0);
/// Lowest-flow edge, if it lies strictly below the percentile of all flows.
std::optional<EdgeId> propose_compression(const TNGraph& g, const std::map<EdgeId, double>& flows,
                                          double pct = 20.0);

/// Observed problem at one scale.
struct ScaledProblem {
    const DenseTensor& data;
    const DenseTensor& mask;
    const CouplingConstants& couplings;
    const SmoothnessModes& smoothness;
    std::size_t s = 0;
};

struct OptimizeResult {
    LossBreakdown loss;
    std::size_t steps = 0;
    bool aborted = false;
    std::string diagnostic;
};

/// Called before every Adam step with the step index within the run, the
/// current loss and graph; returning false stops the run early.
using StepObserver = std::function<bool(std::size_t, const LossBreakdown&, const TNGraph&)>;

/// Full-batch Adam on cores (one group) and diagonals plus gate weights
/// (the other), with the temperature following the global step counter
/// starting at t_start. Fresh optimizer state per call.
OptimizeResult optimize(TNGraph& g, const ScaledProblem& p, std::size_t epochs, const RGConfig& cfg,
                        std::uint64_t t_start, const StepObserver& observer = {});

struct ProposalRecord {
    std::string kind;    // "expand" or "compress"
    std::string action;  // split, drop, decrement, truncate, merge
    int target = 0;      // node id (expand) or edge id (compress)
    double score = 0.0;  // tension or flow
    double loss_before = 0.0;
    double loss_after = 0.0;
    bool accepted = false;
    std::size_t scale = 0;
    std::uint64_t step = 0;
    std::size_t params_before = 0;
    std::size_t params_after = 0;
};

struct ScaleTrace {
    std::size_t s = 0;
    std::vector<LossBreakdown> accepted;  // incumbent loss after each acceptance, starting value first
    double masked_re = 0.0;               // at the data scale, after this scale finished
    double seconds_expand = 0.0;
    double seconds_compress = 0.0;
    double seconds_refine = 0.0;
};

struct RGReport {
    std::vector<ScaleTrace> scales;
    std::vector<ProposalRecord> proposals;
    std::size_t best_scale = 0;  // scale whose end state became the best graph
    double best_masked_re = 0.0;
    std::uint64_t total_steps = 0;
    bool aborted = false;
    std::string diagnostic;
    double seconds = 0.0;
};

/// Graph over the given external shape with one core per mode, wired as a
/// ring, chain or complete graph with uniform bonds. Cores are Gaussian,
/// scaled so the reconstruction has root-mean-square `rms`.
TNGraph init_network(const Shape& shape, InitTopology topo, std::size_t bond, std::uint64_t seed, double rms = 1.0);

/// Mean pooling applied to every physical leg of the network.
TNGraph coarsen_network(const TNGraph& g, const ScaleLevel& level);

/// Masked mean pooling: the average of the observed entries in each window
/// (zero where none is observed). Equals coarse_grain for a full mask.
DenseTensor coarse_grain_observed(const DenseTensor& data, const DenseTensor& mask, const ScaleLevel& level);

/// ||M * (F - X)|| / ||M * F||
double masked_relative_error(const DenseTensor& data, const DenseTensor& mask, const DenseTensor& x);

struct SearchResult {
    TNGraph best;
    TNGraph final;
    RGReport report;
};

/// Runs the search from `init` (sized for the data; it is pooled to the
/// coarsest scale) or, when absent, from the configured preset.
SearchResult rg_search(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg,
                       const std::optional<TNGraph>& init = std::nullopt);

/// Best graph of a full search, for use as an initializer.
TNGraph warm_start(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg);

struct BoundedSearch {
    SearchResult result;
    std::size_t init_bond = 0;
    /// Masked relative error of result.best.
    double re = 0.0;
    bool met = false;
    /// (init_bond, masked relative error) of every search tried.
    std::vector<std::pair<std::size_t, double>> tried;
};

/// Runs rg_search with init_bond = cfg.init_bond, cfg.init_bond + 1, ...,
/// max_bond and stops at the first best graph within re_bound; otherwise
/// returns the max_bond run with met = false.
BoundedSearch rg_search_to_bound(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg,
                                 double re_bound, std::size_t max_bond);

void write_report(std::ostream& os, const RGReport& report);

std::string to_string(InitTopology t);
std::string to_string(CompressionStrategy c);
InitTopology parse_init_topology(const std::string& s);
CompressionStrategy parse_compression_strategy(const std::string& s);

}  // namespace rgtn
