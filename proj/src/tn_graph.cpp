#include "rgtn/tn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rgtn/linalg.hpp"
#include "rgtn/network.hpp"

namespace rgtn {

// ---------------------------------------------------------------------------
// TNGraph bookkeeping

TNGraph::TNGraph(Shape external_shape) : external_(std::move(external_shape)) {
    if (external_.empty()) throw GraphError("TNGraph: external shape must have at least one mode");
    for (auto d : external_)
        if (d == 0) throw GraphError("TNGraph: zero external mode size");
}

TNGraph TNGraph::one_per_mode(Shape external_shape, const std::vector<EdgeSpec>& edges, const CoreInit& init) {
    TNGraph g(std::move(external_shape));
    const auto n = static_cast<NodeId>(g.external_.size());
    for (NodeId k = 0; k < n; ++k) g.add_node(DenseTensor(), {static_cast<std::size_t>(k)});
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) throw GraphError("one_per_mode: edge endpoint out of range");
        g.add_edge(e.u, e.v, e.bond_dim, e.gate_weight);
    }
    for (auto& [id, c] : g.cores_) {
        const Shape shape = g.expected_core_shape(id);
        c.tensor = init ? init(id, shape) : DenseTensor(shape);
        if (c.tensor.shape() != shape) throw GraphError("one_per_mode: initializer returned wrong shape");
    }
    g.validate();
    return g;
}

std::vector<NodeId> TNGraph::node_ids() const {
    std::vector<NodeId> out;
    for (const auto& [id, c] : cores_) out.push_back(id);
    return out;
}

std::vector<EdgeId> TNGraph::edge_ids() const {
    std::vector<EdgeId> out;
    for (const auto& [id, e] : edges_) out.push_back(id);
    return out;
}

const Core& TNGraph::core(NodeId n) const {
    auto it = cores_.find(n);
    if (it == cores_.end()) throw GraphError("no node " + std::to_string(n));
    return it->second;
}

Core& TNGraph::core(NodeId n) {
    auto it = cores_.find(n);
    if (it == cores_.end()) throw GraphError("no node " + std::to_string(n));
    return it->second;
}

const Edge& TNGraph::edge(EdgeId e) const {
    auto it = edges_.find(e);
    if (it == edges_.end()) throw GraphError("no edge " + std::to_string(e));
    return it->second;
}

Edge& TNGraph::edge(EdgeId e) {
    auto it = edges_.find(e);
    if (it == edges_.end()) throw GraphError("no edge " + std::to_string(e));
    return it->second;
}

std::optional<EdgeId> TNGraph::find_edge(NodeId a, NodeId b) const {
    for (const auto& [id, e] : edges_)
        if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) return id;
    return std::nullopt;
}

std::vector<EdgeId> TNGraph::incident(NodeId n) const {
    std::vector<EdgeId> out;
    for (const auto& [id, e] : edges_)
        if (e.u == n || e.v == n) out.push_back(id);
    return out;
}

std::size_t TNGraph::bond_mode(NodeId n, EdgeId e) const {
    const auto inc = incident(n);
    auto it = std::find(inc.begin(), inc.end(), e);
    if (it == inc.end()) throw GraphError("edge " + std::to_string(e) + " is not incident to node " + std::to_string(n));
    return static_cast<std::size_t>(it - inc.begin());
}

Shape TNGraph::expected_core_shape(NodeId n) const {
    Shape s;
    for (EdgeId e : incident(n)) s.push_back(edge(e).bond_dim);
    for (std::size_t m : core(n).physical_modes) s.push_back(external_.at(m));
    if (s.empty()) s.push_back(1);
    return s;
}

const std::vector<double>& TNGraph::diagonal(NodeId n, EdgeId e) const {
    auto it = diagonals_.find({n, e});
    if (it == diagonals_.end())
        throw GraphError("no diagonal for node " + std::to_string(n) + ", edge " + std::to_string(e));
    return it->second;
}

std::vector<double>& TNGraph::diagonal(NodeId n, EdgeId e) {
    auto it = diagonals_.find({n, e});
    if (it == diagonals_.end())
        throw GraphError("no diagonal for node " + std::to_string(n) + ", edge " + std::to_string(e));
    return it->second;
}

NodeId TNGraph::add_node(DenseTensor tensor, std::vector<std::size_t> physical_modes) {
    return add_node_with_id(next_node_, std::move(tensor), std::move(physical_modes));
}

NodeId TNGraph::add_node_with_id(NodeId id, DenseTensor tensor, std::vector<std::size_t> physical_modes) {
    if (cores_.contains(id)) throw GraphError("duplicate node id " + std::to_string(id));
    std::sort(physical_modes.begin(), physical_modes.end());
    for (auto m : physical_modes)
        if (m >= external_.size()) throw GraphError("physical mode out of range");
    cores_.emplace(id, Core{id, std::move(tensor), std::move(physical_modes)});
    next_node_ = std::max(next_node_, id + 1);
    return id;
}

EdgeId TNGraph::add_edge(NodeId u, NodeId v, std::size_t bond_dim, double gate_weight) {
    if (u == v) throw GraphError("self-loop edges are not allowed");
    if (!has_node(u) || !has_node(v)) throw GraphError("edge endpoint does not exist");
    if (find_edge(u, v)) throw GraphError("duplicate edge between " + std::to_string(u) + " and " + std::to_string(v));
    if (bond_dim == 0) throw GraphError("bond dimension must be positive");
    const EdgeId id = next_edge_++;
    edges_.emplace(id, Edge{id, u, v, bond_dim, gate_weight});
    diagonals_[{u, id}] = std::vector<double>(bond_dim, 1.0);
    diagonals_[{v, id}] = std::vector<double>(bond_dim, 1.0);
    return id;
}

void TNGraph::remove_edge_entry(EdgeId e) {
    const Edge ed = edge(e);
    diagonals_.erase({ed.u, e});
    diagonals_.erase({ed.v, e});
    edges_.erase(e);
}

void TNGraph::remove_node_entry(NodeId n) {
    if (!incident(n).empty()) throw GraphError("cannot remove node with incident edges");
    cores_.erase(n);
}

void TNGraph::set_bond_dim(EdgeId e, std::size_t dim) {
    Edge& ed = edge(e);
    ed.bond_dim = dim;
    diagonals_[{ed.u, e}].assign(dim, 1.0);
    diagonals_[{ed.v, e}].assign(dim, 1.0);
}

void TNGraph::reattach(EdgeId e, NodeId from, NodeId to) {
    Edge& ed = edge(e);
    if (ed.u != from && ed.v != from) throw GraphError("reattach: node is not an endpoint");
    const NodeId keep = ed.other(from);
    if (keep == to) throw GraphError("reattach: would create a self-loop");
    if (!has_node(to)) throw GraphError("reattach: target node does not exist");
    if (find_edge(keep, to)) throw GraphError("reattach: would create parallel edges");
    auto d = std::move(diagonals_.at({from, e}));
    diagonals_.erase({from, e});
    diagonals_[{to, e}] = std::move(d);
    (ed.u == from ? ed.u : ed.v) = to;
}

EdgeId TNGraph::insert_edge_with_id(EdgeId id, NodeId u, NodeId v, std::size_t bond_dim, double gate_weight) {
    if (edges_.contains(id)) throw GraphError("duplicate edge id " + std::to_string(id));
    const EdgeId saved = next_edge_;
    next_edge_ = id;
    add_edge(u, v, bond_dim, gate_weight);
    next_edge_ = std::max(saved, id + 1);
    return id;
}

void TNGraph::validate() const {
    std::vector<int> carried(external_.size(), 0);
    for (const auto& [id, c] : cores_) {
        if (c.id != id) throw GraphError("core id mismatch");
        for (auto m : c.physical_modes) {
            if (m >= external_.size()) throw GraphError("physical mode out of range");
            ++carried[m];
        }
        const Shape want = expected_core_shape(id);
        if (c.tensor.shape() != want)
            throw GraphError("core " + std::to_string(id) + " has shape " + shape_to_string(c.tensor.shape()) +
                             ", expected " + shape_to_string(want));
    }
    for (std::size_t m = 0; m < carried.size(); ++m)
        if (carried[m] != 1) throw GraphError("external mode " + std::to_string(m) + " is carried " +
                                              std::to_string(carried[m]) + " times");
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& [id, e] : edges_) {
        if (e.id != id || e.u == e.v || !has_node(e.u) || !has_node(e.v)) throw GraphError("malformed edge");
        if (!pairs.insert(std::minmax(e.u, e.v)).second) throw GraphError("parallel edges");
        for (NodeId n : {e.u, e.v})
            if (diagonal(n, id).size() != e.bond_dim) throw GraphError("diagonal length mismatch");
    }
    if (diagonals_.size() != 2 * edges_.size()) throw GraphError("stray diagonal factors");
}

// ---------------------------------------------------------------------------
// Gates, bond operators, reconstruction

double gate(double w, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("gate: temperature must be positive");
    const double z = w / tau;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double ez = std::exp(z);
    return ez / (1.0 + ez);
}

Matrix bond_operator(double g, std::size_t r) {
    Matrix b(r, r);
    const double off = (1.0 - g) / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) b(i, j) = off + (i == j ? g : 0.0);
    return b;
}

DenseTensor effective_core(const TNGraph& g, NodeId n) {
    DenseTensor t = g.core(n).tensor;
    const auto inc = g.incident(n);
    for (std::size_t k = 0; k < inc.size(); ++k) {
        const auto& d = g.diagonal(n, inc[k]);
        if (d.size() != t.dim(k)) throw GraphError("effective_core: diagonal length mismatch");
        bool ones = std::all_of(d.begin(), d.end(), [](double x) { return x == 1.0; });
        if (!ones) t = scale_mode(t, k, d);
    }
    return t;
}

namespace {

int physical_label(std::size_t mode) { return -1 - static_cast<int>(mode); }

std::vector<int> core_labels(const TNGraph& g, NodeId n) {
    std::vector<int> labels;
    for (EdgeId e : g.incident(n)) labels.push_back(e);
    for (auto m : g.core(n).physical_modes) labels.push_back(physical_label(m));
    return labels;
}

}  // namespace

DenseTensor reconstruct(const TNGraph& g, double tau) {
    std::vector<LabeledTensor> ops;
    for (NodeId n : g.node_ids()) {
        DenseTensor t = effective_core(g, n);
        const auto inc = g.incident(n);
        for (std::size_t k = 0; k < inc.size(); ++k) {
            const Edge& e = g.edge(inc[k]);
            if (e.u != n || e.bond_dim == 1) continue;
            const double gv = gate(e.gate_weight, tau);
            if (gv != 1.0) t = mode_product(t, k, bond_operator(gv, e.bond_dim));
        }
        auto labels = core_labels(g, n);
        if (labels.empty()) t = t.reshaped({1});
        ops.push_back({std::move(t), std::move(labels)});
    }
    std::vector<int> out;
    for (std::size_t m = 0; m < g.external_shape().size(); ++m) out.push_back(physical_label(m));
    return contract_network(std::move(ops), out);
}

std::size_t param_count(const TNGraph& g) {
    std::size_t total = 0;
    for (const auto& [id, c] : g.cores()) total += c.tensor.size();
    return total;
}

double compression_ratio(const TNGraph& g) {
    return 100.0 * static_cast<double>(param_count(g)) / static_cast<double>(shape_numel(g.external_shape()));
}

// ---------------------------------------------------------------------------
// Structural edits

namespace {

// Identifies a core mode independently of its position: a bond (edge id) or
// a physical leg (external mode).
struct ModeKey {
    bool bond = true;
    std::size_t id = 0;
    auto operator<=>(const ModeKey&) const = default;
};

bool canonical_less(const ModeKey& a, const ModeKey& b) {
    if (a.bond != b.bond) return a.bond;  // bonds first
    return a.id < b.id;
}

std::vector<ModeKey> mode_keys(const TNGraph& g, NodeId n) {
    std::vector<ModeKey> keys;
    for (EdgeId e : g.incident(n)) keys.push_back({true, static_cast<std::size_t>(e)});
    for (auto m : g.core(n).physical_modes) keys.push_back({false, m});
    return keys;
}

// Permutes t (whose modes are described by keys) into canonical core order.
DenseTensor canonicalize(const DenseTensor& t, const std::vector<ModeKey>& keys) {
    std::vector<std::size_t> perm(keys.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return canonical_less(keys[a], keys[b]); });
    return permute(t, perm);
}

// Multiplies diag(D_n) B diag(D_m) into n's core along e and resets the
// bond to a plain contraction (unit diagonals, transparent gate).
void absorb_bond(TNGraph& g, EdgeId e, NodeId n, double tau) {
    Edge& ed = g.edge(e);
    const NodeId m = ed.other(n);
    const std::size_t r = ed.bond_dim;
    Matrix op = bond_operator(r == 1 ? 1.0 : gate(ed.gate_weight, tau), r);
    const auto& dn = g.diagonal(n, e);
    const auto& dm = g.diagonal(m, e);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) op(i, j) *= dn[i] * dm[j];
    Core& c = g.core(n);
    c.tensor = mode_product(c.tensor, g.bond_mode(n, e), op);
    ed.gate_weight = kTransparentGateWeight;
    g.diagonal(n, e).assign(r, 1.0);
    g.diagonal(m, e).assign(r, 1.0);
}

// Gives a clean bond the standard new-edge gate and compensates with the
// inverse bond operator on the v side so the reconstruction is unchanged.
void rearm(TNGraph& g, EdgeId e, double tau) {
    Edge& ed = g.edge(e);
    ed.gate_weight = kNewEdgeGateWeight;
    const std::size_t r = ed.bond_dim;
    if (r == 1) return;
    const double gv = gate(ed.gate_weight, tau);
    if (gv == 1.0) return;
    // B^{-1} = (1/g)(I - J/R) + J/R
    Matrix inv(r, r);
    const double rr = static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) inv(i, j) = (i == j ? 1.0 / gv : 0.0) + (1.0 - 1.0 / gv) / rr;
    Core& c = g.core(ed.v);
    c.tensor = mode_product(c.tensor, g.bond_mode(ed.v, e), inv);
}

Matrix scale_cols(Matrix m, const std::vector<double>& s) {
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) *= s[j];
    return m;
}

Matrix scale_rows(Matrix m, const std::vector<double>& s) {
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) *= s[i];
    return m;
}

std::vector<double> sqrt_all(const std::vector<double>& s) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::sqrt(s[i]);
    return out;
}

// Truncates a clean bond e between its endpoints through an SVD of the
// contraction of the two cores, computed from the thin SVDs of each side.
void truncate_clean_bond(TNGraph& g, EdgeId e, double threshold, std::optional<std::size_t> max_rank) {
    const Edge ed = g.edge(e);
    const std::size_t mu = g.bond_mode(ed.u, e), mv = g.bond_mode(ed.v, e);
    const Shape su = g.core(ed.u).tensor.shape(), sv = g.core(ed.v).tensor.shape();
    const Matrix a = unfold(g.core(ed.u).tensor, mu);  // R x restU
    const Matrix b = unfold(g.core(ed.v).tensor, mv);  // R x restV
    // a^T = P1 S1 Q1^T, b = P2 S2 Q2^T, contraction = a^T b = P1 (S1 Q1^T P2 S2) Q2^T
    const ThinSVD sa = svd_thin(transpose(a));
    const ThinSVD sb = svd_thin(b);
    const Matrix w = matmul(scale_rows(sa.vt, sa.s), scale_cols(sb.u, sb.s));
    const TruncatedSVD t = svd_truncated(w, threshold, max_rank);
    const auto root = sqrt_all(t.singular);
    // New a (r x restU) = sqrt(s) X^T P1^T ; new b (r x restV) = sqrt(s) Y^T Q2^T
    const Matrix new_a = scale_rows(matmul(transpose(t.left), transpose(sa.u)), root);
    const Matrix new_b = scale_rows(matmul(t.right, sb.vt), root);
    Shape nsu = su, nsv = sv;
    nsu[mu] = t.rank;
    nsv[mv] = t.rank;
    g.core(ed.u).tensor = fold(new_a, mu, nsu);
    g.core(ed.v).tensor = fold(new_b, mv, nsv);
    g.set_bond_dim(e, t.rank);
}

// Truncates clean bond e of node n by an SVD of n's core alone, pushing the
// basis change into the neighbor.
void truncate_bond_from(TNGraph& g, NodeId n, EdgeId e, double threshold) {
    const NodeId m = g.edge(e).other(n);
    const std::size_t mn = g.bond_mode(n, e), mm = g.bond_mode(m, e);
    const Matrix a = unfold(g.core(n).tensor, mn);  // R x rest
    const TruncatedSVD t = svd_truncated(a, threshold);
    if (t.rank == a.rows && !t.degenerate) return;
    Shape sn = g.core(n).tensor.shape();
    sn[mn] = t.rank;
    g.core(n).tensor = fold(scale_rows(t.right, t.singular), mn, sn);
    g.core(m).tensor = mode_product(g.core(m).tensor, mm, t.left);
    g.set_bond_dim(e, t.rank);
}

void check_partition(const SplitPartition& p, std::size_t order) {
    std::vector<int> seen(order, 0);
    for (auto i : p.first) {
        if (i >= order) throw GraphError("split: partition mode out of range");
        if (seen[i]++) throw GraphError("split: repeated mode in partition");
    }
    if (p.first.empty() || p.first.size() >= order) throw GraphError("split: both parts must be nonempty");
}

}  // namespace

SplitPartition default_partition(const TNGraph& g, NodeId n) {
    const auto inc = g.incident(n);
    const Core& c = g.core(n);
    const std::size_t m = inc.size(), order = c.tensor.order();
    if (m + c.physical_modes.size() < 2) throw GraphError("default_partition: core has fewer than two modes");
    std::size_t phys_size = 1;
    for (auto pm : c.physical_modes) phys_size *= g.external_shape()[pm];
    const bool has_phys = !c.physical_modes.empty();

    if (m == 0) return {{m}};  // several physical legs, no bonds: peel off the first leg

    std::size_t total_bond = 1;
    for (EdgeId e : inc) total_bond *= g.edge(e).bond_dim;
    std::optional<std::pair<std::size_t, std::vector<EdgeId>>> best;
    std::vector<std::size_t> best_modes;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        const auto bits = static_cast<std::size_t>(std::popcount(mask));
        if (has_phys ? bits == m : (bits == 0 || bits == m)) continue;
        std::size_t first = has_phys ? phys_size : 1;
        std::vector<EdgeId> ids;
        std::vector<std::size_t> modes;
        for (std::size_t k = 0; k < m; ++k)
            if (mask >> k & 1) {
                first *= g.edge(inc[k]).bond_dim;
                ids.push_back(inc[k]);
                modes.push_back(k);
            }
        const std::size_t second = total_bond * (has_phys ? phys_size : 1) / first;
        const std::size_t cost = std::max(first, second);
        if (!best || cost < best->first || (cost == best->first && ids < best->second)) {
            best = {cost, ids};
            best_modes = modes;
        }
    }
    for (std::size_t k = m; k < order; ++k) best_modes.push_back(k);
    return {best_modes};
}

EditResult split_node(TNGraph& g, NodeId n, const SplitPartition& partition, double threshold,
                      std::optional<std::size_t> max_rank, double tau) {
    const Core& c = g.core(n);
    const std::size_t order = c.tensor.order();
    check_partition(partition, order);
    const auto keys = mode_keys(g, n);
    std::vector<bool> in_first(order, false);
    for (auto i : partition.first) in_first[i] = true;
    std::vector<std::size_t> first, second;
    for (std::size_t i = 0; i < order; ++i) (in_first[i] ? first : second).push_back(i);

    std::vector<std::size_t> perm = first;
    perm.insert(perm.end(), second.begin(), second.end());
    std::size_t rows = 1, cols = 1;
    for (auto i : first) rows *= c.tensor.dim(i);
    for (auto i : second) cols *= c.tensor.dim(i);
    const DenseTensor p = permute(c.tensor, perm);
    const TruncatedSVD t = svd_truncated(p.as_matrix(rows, cols), threshold, max_rank);
    const auto root = sqrt_all(t.singular);
    const Matrix left = scale_cols(t.left, root);    // rows x r
    const Matrix right = scale_rows(t.right, root);  // r x cols

    // The half holding physical legs keeps the node id.
    auto has_phys = [&](const std::vector<std::size_t>& part) {
        return std::any_of(part.begin(), part.end(), [&](std::size_t i) { return !keys[i].bond; });
    };
    const bool first_keeps = has_phys(first) || !has_phys(second);
    const auto& keep = first_keeps ? first : second;
    const auto& move = first_keeps ? second : first;

    std::vector<std::size_t> move_phys, keep_phys;
    for (auto i : keep) if (!keys[i].bond) keep_phys.push_back(keys[i].id);
    for (auto i : move) if (!keys[i].bond) move_phys.push_back(keys[i].id);

    const NodeId fresh = g.add_node(DenseTensor(), move_phys);
    g.core(n).physical_modes = keep_phys;
    for (auto i : move)
        if (keys[i].bond) g.reattach(static_cast<EdgeId>(keys[i].id), n, fresh);
    const EdgeId bond = g.add_edge(n, fresh, t.rank, kTransparentGateWeight);
    const ModeKey bond_key{true, static_cast<std::size_t>(bond)};

    auto build = [&](const std::vector<std::size_t>& part, bool bond_last) {
        Shape shape;
        std::vector<ModeKey> k;
        if (!bond_last) {
            shape.push_back(t.rank);
            k.push_back(bond_key);
        }
        for (auto i : part) {
            shape.push_back(c.tensor.dim(i));
            k.push_back(keys[i]);
        }
        if (bond_last) {
            shape.push_back(t.rank);
            k.push_back(bond_key);
        }
        const Matrix& m = bond_last ? left : right;
        return canonicalize(DenseTensor(shape, m.data), k);
    };
    DenseTensor first_core = build(first, true);
    DenseTensor second_core = build(second, false);
    g.core(n).tensor = first_keeps ? std::move(first_core) : std::move(second_core);
    g.core(fresh).tensor = first_keeps ? std::move(second_core) : std::move(first_core);
    rearm(g, bond, tau);
    g.validate();
    return {fresh, bond};
}

EditResult merge_nodes(TNGraph& g, NodeId u, NodeId v, double threshold, double tau) {
    const auto e = g.find_edge(u, v);
    if (!e) throw GraphError("merge_nodes: no edge between " + std::to_string(u) + " and " + std::to_string(v));
    absorb_bond(g, *e, u, tau);

    // Common neighbours would end up with two parallel bonds; make those bonds
    // clean so they can be fused into one after contraction.
    std::vector<std::pair<EdgeId, EdgeId>> parallel;  // (u-side edge, v-side edge)
    for (EdgeId f : g.incident(v)) {
        if (f == *e) continue;
        const NodeId w = g.edge(f).other(v);
        if (auto fu = g.find_edge(u, w)) {
            absorb_bond(g, *fu, u, tau);
            absorb_bond(g, f, v, tau);
            parallel.emplace_back(*fu, f);
        }
    }

    auto ku = mode_keys(g, u), kv = mode_keys(g, v);
    const std::size_t mu = g.bond_mode(u, *e), mv = g.bond_mode(v, *e);
    DenseTensor merged = contract(g.core(u).tensor, {mu}, g.core(v).tensor, {mv});
    std::vector<ModeKey> keys;
    for (std::size_t i = 0; i < ku.size(); ++i) if (i != mu) keys.push_back(ku[i]);
    for (std::size_t i = 0; i < kv.size(); ++i) if (i != mv) keys.push_back(kv[i]);

    auto phys = g.core(u).physical_modes;
    const auto& pv = g.core(v).physical_modes;
    phys.insert(phys.end(), pv.begin(), pv.end());
    std::sort(phys.begin(), phys.end());

    g.remove_edge_entry(*e);
    std::vector<EdgeId> v_edges = g.incident(v);
    for (const auto& [fu, fv] : parallel) {
        // Fuse fv into fu: reshape the two adjacent modes into one of size Ru*Rv
        // on both the merged core and the shared neighbour.
        const NodeId w = g.edge(fu).other(u);
        const std::size_t ru = g.edge(fu).bond_dim, rv = g.edge(fv).bond_dim;
        auto fuse = [&](DenseTensor t, std::vector<ModeKey>& k) {
            const auto pos_u = static_cast<std::size_t>(std::find(k.begin(), k.end(), ModeKey{true, static_cast<std::size_t>(fu)}) - k.begin());
            const auto pos_v = static_cast<std::size_t>(std::find(k.begin(), k.end(), ModeKey{true, static_cast<std::size_t>(fv)}) - k.begin());
            std::vector<std::size_t> perm;
            for (std::size_t i = 0; i < k.size(); ++i) if (i != pos_u && i != pos_v) perm.push_back(i);
            perm.push_back(pos_u);
            perm.push_back(pos_v);
            DenseTensor p = permute(t, perm);
            Shape s;
            std::vector<ModeKey> nk;
            for (std::size_t i = 0; i + 2 < perm.size(); ++i) {
                s.push_back(t.dim(perm[i]));
                nk.push_back(k[perm[i]]);
            }
            s.push_back(ru * rv);
            nk.push_back(ModeKey{true, static_cast<std::size_t>(fu)});
            k = nk;
            return std::move(p).reshaped(s);
        };
        merged = fuse(std::move(merged), keys);
        auto kw = mode_keys(g, w);
        DenseTensor wt = fuse(g.core(w).tensor, kw);
        g.remove_edge_entry(fv);
        std::erase(v_edges, fv);
        g.set_bond_dim(fu, ru * rv);
        g.core(w).tensor = canonicalize(wt, kw);
    }
    for (EdgeId f : v_edges) g.reattach(f, v, u);
    g.remove_node_entry(v);
    g.core(u).physical_modes = phys;
    g.core(u).tensor = canonicalize(merged, keys);
    for (const auto& [fu, fv] : parallel) g.edge(fu).gate_weight = kTransparentGateWeight;

    for (EdgeId f : g.incident(u)) {
        absorb_bond(g, f, u, tau);
        truncate_bond_from(g, u, f, threshold);
        rearm(g, f, tau);
    }
    g.validate();
    return {u, std::nullopt};
}

EditResult edge_truncate(TNGraph& g, EdgeId e, double threshold, std::optional<std::size_t> max_rank, double tau) {
    const Edge ed = g.edge(e);
    absorb_bond(g, e, ed.u, tau);
    truncate_clean_bond(g, e, threshold, max_rank);
    rearm(g, e, tau);
    g.validate();
    return {std::nullopt, e};
}

void remove_unit_edge(TNGraph& g, EdgeId e, double tau) {
    const Edge ed = g.edge(e);
    if (ed.bond_dim != 1) throw GraphError("remove_unit_edge: bond dimension is not 1");
    absorb_bond(g, e, ed.u, tau);
    for (NodeId n : {ed.u, ed.v}) {
        Core& c = g.core(n);
        Shape s = c.tensor.shape();
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(g.bond_mode(n, e)));
        if (s.empty()) s.push_back(1);
        c.tensor = std::move(c.tensor).reshaped(s);
    }
    g.remove_edge_entry(e);
    g.validate();
}

TNGraph finalize(const TNGraph& src, double tau, double delta_gate) {
    TNGraph g = src;
    for (EdgeId e : g.edge_ids()) {
        const double gv = gate(g.edge(e).gate_weight, tau);
        absorb_bond(g, e, g.edge(e).u, tau);
        if (gv < delta_gate) truncate_clean_bond(g, e, 0.0, 1);
        if (g.edge(e).bond_dim == 1) remove_unit_edge(g, e, tau);
    }
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Hardening

std::set<std::pair<NodeId, NodeId>> StructureSignature::adjacency() const {
    std::set<std::pair<NodeId, NodeId>> out;
    for (const auto& [pair, r] : ranks) out.insert(pair);
    return out;
}

StructureSignature harden(const TNGraph& g, double eps_diag, double delta_gate, double tau) {
    StructureSignature sig;
    sig.node_count = g.node_count();
    for (const auto& [id, c] : g.cores()) sig.physical[id] = c.physical_modes;
    for (const auto& [id, e] : g.edges()) {
        if (gate(e.gate_weight, tau) < delta_gate) continue;
        const auto& du = g.diagonal(e.u, id);
        const auto& dv = g.diagonal(e.v, id);
        std::size_t rank = 0;
        for (std::size_t j = 0; j < e.bond_dim; ++j)
            if (std::min(std::abs(du[j]), std::abs(dv[j])) >= eps_diag) ++rank;
        sig.ranks[std::minmax(e.u, e.v)] = std::max<std::size_t>(rank, 1);
    }
    return sig;
}

// ---------------------------------------------------------------------------
// Structure files (JSON; doubles are written in shortest round-trip form)

void write_structure(std::ostream& os, const TNGraph& g) {
    nlohmann::json j;
    j["format"] = "rgtn-structure";
    j["version"] = 1;
    j["external_shape"] = g.external_shape();
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& [id, c] : g.cores())
        nodes.push_back({{"id", id}, {"physical_modes", c.physical_modes}, {"shape", c.tensor.shape()},
                         {"values", c.tensor.values()}});
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& [id, e] : g.edges())
        edges.push_back({{"id", id}, {"u", e.u}, {"v", e.v}, {"bond_dim", e.bond_dim}, {"gate_weight", e.gate_weight}});
    auto& diags = j["diagonals"] = nlohmann::json::array();
    for (const auto& [key, d] : g.diagonals())
        diags.push_back({{"node", key.first}, {"edge", key.second}, {"values", d}});
    os << j.dump(1) << '\n';
    if (!os) throw GraphError("write_structure: write failed");
}

TNGraph read_structure(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
        if (j.at("format") != "rgtn-structure" || j.at("version") != 1)
            throw GraphError("read_structure: unsupported format");
        TNGraph g(j.at("external_shape").get<Shape>());
        for (const auto& n : j.at("nodes"))
            g.add_node_with_id(n.at("id").get<NodeId>(),
                               DenseTensor(n.at("shape").get<Shape>(), n.at("values").get<std::vector<double>>()),
                               n.at("physical_modes").get<std::vector<std::size_t>>());
        // Edges are re-created in id order so that ids are preserved.
        std::map<EdgeId, nlohmann::json> edges;
        for (const auto& e : j.at("edges")) edges[e.at("id").get<EdgeId>()] = e;
        for (const auto& [id, e] : edges) g.insert_edge_with_id(id, e.at("u"), e.at("v"), e.at("bond_dim"), e.at("gate_weight"));
        for (const auto& d : j.at("diagonals"))
            g.diagonal(d.at("node").get<NodeId>(), d.at("edge").get<EdgeId>()) = d.at("values").get<std::vector<double>>();
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& ex) {
        throw GraphError(std::string("read_structure: ") + ex.what());
    } catch (const ShapeError& ex) {
        throw GraphError(std::string("read_structure: ") + ex.what());
    }
}

void save_structure(const std::filesystem::path& path, const TNGraph& g) {
    std::ofstream os(path);
    if (!os) throw GraphError("cannot open " + path.string() + " for writing");
    write_structure(os, g);
}

TNGraph load_structure(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw GraphError("cannot open " + path.string());
    return read_structure(is);
}

}  // namespace rgtn
