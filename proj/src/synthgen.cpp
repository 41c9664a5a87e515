#include "rgtn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace rgtn {

void TruthSpec::validate() const {
    if (dims.empty()) throw std::invalid_argument("TruthSpec: no modes");
    for (auto d : dims)
        if (d == 0) throw std::invalid_argument("TruthSpec: zero mode size");
    if (bond_min < 1 || bond_min > bond_max) throw std::invalid_argument("TruthSpec: bad bond range");
    std::set<std::pair<NodeId, NodeId>> seen;
    const auto n = static_cast<NodeId>(dims.size());
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("TruthSpec: edge endpoint out of range");
        if (a == b) throw std::invalid_argument("TruthSpec: self loop");
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
            throw std::invalid_argument("TruthSpec: repeated edge");
    }
}

TNGraph gen_structure(const TruthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> bond(spec.bond_min, spec.bond_max);
    std::vector<EdgeSpec> edges;
    for (auto [a, b] : spec.edges) edges.push_back({a, b, bond(rng), kTruthGateWeight});
    TNGraph g = TNGraph::one_per_mode(spec.dims, edges);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (NodeId n : g.node_ids()) {
        double p = 1.0;
        for (EdgeId e : g.incident(n)) p *= static_cast<double>(g.edge(e).bond_dim);
        const double scale = std::pow(p, -0.25);
        for (auto& v : g.core(n).tensor.values()) v = scale * normal(rng);
    }
    return g;
}

DenseTensor realize(const TNGraph& g) { return reconstruct(g, kRealizeTemperature); }

DenseTensor gen_mask(const Shape& shape, double missing_fraction, std::uint64_t seed) {
    if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
        throw std::invalid_argument("gen_mask: missing fraction must lie in [0, 1)");
    DenseTensor mask(shape);
    const std::size_t n = mask.size();
    const auto observed = static_cast<std::size_t>(std::llround((1.0 - missing_fraction) * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first `observed` slots are a uniform sample.
    for (std::size_t i = 0; i < observed; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        mask[idx[i]] = 1.0;
    }
    return mask;
}

DenseTensor add_noise(const DenseTensor& t, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be non-negative");
    if (sigma == 0.0) return t;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseTensor noise(t.shape());
    for (auto& v : noise.values()) v = normal(rng);
    const double norm = frobenius_norm(noise);
    noise *= sigma / norm;
    return t + noise;
}

namespace {

std::vector<std::pair<NodeId, NodeId>> ring_edges(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (std::size_t k = 0; k + 1 < n; ++k) e.push_back({int(k), int(k + 1)});
    e.push_back({0, int(n - 1)});
    return e;
}

}  // namespace

std::vector<std::string> reveal_topologies() { return {"chain", "star", "ring", "tri_pendant", "ring_chord"}; }

std::vector<std::string> preset_names() {
    auto names = reveal_topologies();
    names.insert(names.end(), {"order6", "order8", "video"});
    return names;
}

TruthSpec preset(const std::string& name, std::uint64_t seed) {
    TruthSpec s;
    s.seed = seed;
    const Shape reveal_dims{6, 7, 8, 6};
    if (name == "order6") {
        s.dims = {7, 8, 7, 8, 7, 8};
        s.edges = ring_edges(6);
    } else if (name == "order8") {
        s.dims = {7, 8, 7, 8, 7, 8, 7, 8};
        s.edges = ring_edges(8);
    } else if (name == "video") {
        s.dims = {20, 32, 32, 3};
        s.edges = ring_edges(4);
    } else if (name == "chain") {
        s.dims = reveal_dims;
        s.edges = {{0, 1}, {1, 2}, {2, 3}};
    } else if (name == "star") {
        s.dims = reveal_dims;
        s.edges = {{0, 1}, {0, 2}, {0, 3}};
    } else if (name == "ring") {
        s.dims = reveal_dims;
        s.edges = ring_edges(4);
    } else if (name == "tri_pendant") {
        s.dims = reveal_dims;
        s.edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}};
    } else if (name == "ring_chord") {
        s.dims = reveal_dims;
        s.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}};
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return s;
}

}  // namespace rgtn
