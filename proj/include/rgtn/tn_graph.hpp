#pragma once
// Tensor network with gated bonds and per-bond diagonal reweighting.
//
// Core tensor layout: one mode per incident edge in ascending edge-id order,
// followed by the physical legs in ascending external-mode order.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "rgtn/tensor.hpp"

namespace rgtn {

using NodeId = int;
using EdgeId = int;

/// A gate weight that makes sigma(w / tau) round to exactly 1.0 for every
/// tau <= 1, i.e. a bond that behaves as a plain contraction.
inline constexpr double kTransparentGateWeight = 50.0;
/// Gate weight given to bonds created or rewritten by structural edits.
inline constexpr double kNewEdgeGateWeight = 2.0;

struct Core {
    NodeId id = 0;
    DenseTensor tensor;
    std::vector<std::size_t> physical_modes;  // external modes carried, ascending
};

struct Edge {
    EdgeId id = 0;
    NodeId u = 0;
    NodeId v = 0;
    std::size_t bond_dim = 1;
    double gate_weight = kNewEdgeGateWeight;

    NodeId other(NodeId n) const { return n == u ? v : u; }
};

struct EdgeSpec {
    NodeId u = 0;
    NodeId v = 0;
    std::size_t bond_dim = 1;
    double gate_weight = kNewEdgeGateWeight;
};

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TNGraph {
public:
    TNGraph() = default;
    explicit TNGraph(Shape external_shape);

    /// One core per external mode (node k carries mode k). `init` receives the
    /// node id and the core shape and returns the core tensor; a null `init`
    /// gives zero cores. Diagonals start at 1.
    using CoreInit = std::function<DenseTensor(NodeId, const Shape&)>;
    static TNGraph one_per_mode(Shape external_shape, const std::vector<EdgeSpec>& edges, const CoreInit& init = {});

    const Shape& external_shape() const { return external_; }
    std::size_t node_count() const { return cores_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::map<NodeId, Core>& cores() const { return cores_; }
    const std::map<EdgeId, Edge>& edges() const { return edges_; }
    std::vector<NodeId> node_ids() const;
    std::vector<EdgeId> edge_ids() const;

    bool has_node(NodeId n) const { return cores_.contains(n); }
    bool has_edge(EdgeId e) const { return edges_.contains(e); }
    const Core& core(NodeId n) const;
    Core& core(NodeId n);
    const Edge& edge(EdgeId e) const;
    Edge& edge(EdgeId e);
    std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;

    /// Incident edges of n, ascending (this is also the core's bond mode order).
    std::vector<EdgeId> incident(NodeId n) const;
    std::size_t degree(NodeId n) const { return incident(n).size(); }
    /// Mode index of edge e inside n's core.
    std::size_t bond_mode(NodeId n, EdgeId e) const;
    /// Core shape implied by the current bonds and physical legs of n.
    Shape expected_core_shape(NodeId n) const;

    const std::vector<double>& diagonal(NodeId n, EdgeId e) const;
    std::vector<double>& diagonal(NodeId n, EdgeId e);
    const std::map<std::pair<NodeId, EdgeId>, std::vector<double>>& diagonals() const { return diagonals_; }

    // Low-level mutators. They keep bookkeeping (ids, diagonals) consistent
    // but leave core tensors to the caller; call validate() afterwards.
    NodeId add_node(DenseTensor tensor, std::vector<std::size_t> physical_modes);
    NodeId add_node_with_id(NodeId id, DenseTensor tensor, std::vector<std::size_t> physical_modes);
    EdgeId add_edge(NodeId u, NodeId v, std::size_t bond_dim, double gate_weight);
    EdgeId insert_edge_with_id(EdgeId id, NodeId u, NodeId v, std::size_t bond_dim, double gate_weight);
    void remove_edge_entry(EdgeId e);
    void remove_node_entry(NodeId n);
    void set_bond_dim(EdgeId e, std::size_t dim);
    /// Moves the `from` end of edge e to node `to`, keeping its id and diagonal.
    void reattach(EdgeId e, NodeId from, NodeId to);

    /// Throws GraphError describing the first violated invariant.
    void validate() const;

private:
    Shape external_;
    std::map<NodeId, Core> cores_;
    std::map<EdgeId, Edge> edges_;
    std::map<std::pair<NodeId, EdgeId>, std::vector<double>> diagonals_;
    NodeId next_node_ = 0;
    EdgeId next_edge_ = 0;
};

/// Logistic gate sigma(w / tau); tau must be positive.
double gate(double w, double tau);

/// B(g) = g I + (1 - g) J / R.
Matrix bond_operator(double g, std::size_t r);

/// Core with every bond mode scaled by its diagonal factor.
DenseTensor effective_core(const TNGraph& g, NodeId n);

/// Full contraction with bond operators inserted on every edge; modes of the
/// result follow the external mode order.
DenseTensor reconstruct(const TNGraph& g, double tau);

std::size_t param_count(const TNGraph& g);
double compression_ratio(const TNGraph& g);

/// Mode indices of a core assigned to the first factor of a split.
struct SplitPartition {
    std::vector<std::size_t> first;
};

/// Default split partition: the physical legs together with the subset of
/// bonds that minimizes the larger matricization dimension.
SplitPartition default_partition(const TNGraph& g, NodeId n);

/// Result of a structural edit: the ids it created or touched.
struct EditResult {
    std::optional<NodeId> node;  // new node (split) or surviving node (merge)
    std::optional<EdgeId> edge;  // new or rewritten edge
};

/// Splits n into two cores joined by a new bond. The half holding n's
/// physical legs keeps id n.
EditResult split_node(TNGraph& g, NodeId n, const SplitPartition& partition, double threshold,
                      std::optional<std::size_t> max_rank, double tau);

/// Contracts the pair (u, v) into one core (id u) and truncates each of its
/// remaining bonds by SVD.
EditResult merge_nodes(TNGraph& g, NodeId u, NodeId v, double threshold, double tau);

/// Re-factorizes the two cores across e with a truncated SVD of their
/// contraction; topology is unchanged.
EditResult edge_truncate(TNGraph& g, EdgeId e, double threshold, std::optional<std::size_t> max_rank, double tau);

/// Removes an edge of bond dimension 1, absorbing its scalar weights.
void remove_unit_edge(TNGraph& g, EdgeId e, double tau);

/// Multiplies all diagonals and bond operators into the cores, drops edges
/// whose gate is below delta_gate (after truncating them to rank 1) and
/// removes rank-1 bonds. The result reconstructs identically up to the
/// dropped edges.
TNGraph finalize(const TNGraph& g, double tau, double delta_gate);

struct StructureSignature {
    std::size_t node_count = 0;
    std::map<std::pair<NodeId, NodeId>, std::size_t> ranks;   // surviving edges, (min id, max id)
    std::map<NodeId, std::vector<std::size_t>> physical;       // external modes per node

    std::set<std::pair<NodeId, NodeId>> adjacency() const;
    bool operator==(const StructureSignature&) const = default;
};

StructureSignature harden(const TNGraph& g, double eps_diag, double delta_gate, double tau);

void write_structure(std::ostream& os, const TNGraph& g);
TNGraph read_structure(std::istream& is);
void save_structure(const std::filesystem::path& path, const TNGraph& g);
TNGraph load_structure(const std::filesystem::path& path);

}  // namespace rgtn
