#pragma once
// Ground-truth tensor networks, observation masks and noise for synthetic
// experiments. Every generator is a pure function of its inputs and seed.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rgtn/tensor.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

struct TruthSpec {
    Shape dims;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t bond_min = 2;
    std::size_t bond_max = 3;
    std::uint64_t seed = 0;

    std::size_t order() const { return dims.size(); }
    /// Throws std::invalid_argument unless edges form a simple graph over
    /// the modes and 1 <= bond_min <= bond_max.
    void validate() const;
};

/// Gate weight of ground-truth edges.
inline constexpr double kTruthGateWeight = 5.0;
/// Temperature at which ground-truth gates round to exactly 1.
inline constexpr double kRealizeTemperature = 0.01;

/// One Gaussian core per mode, bonds drawn uniformly from the range, entries
/// scaled by (product of incident bonds)^(-1/4) so the reconstruction has
/// unit entry variance.
TNGraph gen_structure(const TruthSpec& spec);

/// Reconstruction with saturated gates.
DenseTensor realize(const TNGraph& g);

/// Exactly round((1 - missing_fraction) * numel) observed entries.
DenseTensor gen_mask(const Shape& shape, double missing_fraction, std::uint64_t seed);

/// Adds Gaussian noise rescaled to Frobenius norm exactly sigma.
DenseTensor add_noise(const DenseTensor& t, double sigma, std::uint64_t seed);

/// Named presets: "order6" (7,8,7,8,7,8 ring), "order8" (7,8,...,8 ring),
/// "video" (20,32,32,3 ring) and the five 4th-order reveal topologies
/// "chain", "star", "ring", "tri_pendant", "ring_chord".
TruthSpec preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> preset_names();
std::vector<std::string> reveal_topologies();

/// Missing fraction used by the video preset.
inline constexpr double kVideoMissingFraction = 0.9;

}  // namespace rgtn
