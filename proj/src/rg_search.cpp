#include "rgtn/rg_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rgtn/kernels.hpp"
#include "rgtn/linalg.hpp"

namespace rgtn {

void RGConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("RGConfig: ") + what);
    };
    require(eta0_cores > 0.0 && eta0_struct > 0.0, "learning rates must be positive");
    require(s0 > 0.0 && s1 > 0.0, "learning-rate scale constants must be positive");
    require(tau0 > 0.0 && t0 > 0.0 && tau_floor > 0.0, "temperature constants must be positive");
    require(svd_threshold >= 0.0 && svd_threshold < 1.0, "svd_threshold must lie in [0, 1)");
    require(tension_percentile > 0.0 && tension_percentile < 100.0, "tension_percentile must lie in (0, 100)");
    require(flow_percentile > 0.0 && flow_percentile < 100.0, "flow_percentile must lie in (0, 100)");
    require(eps_diag > 0.0, "eps_diag must be positive");
    require(delta_gate > 0.0 && delta_gate < 1.0, "delta_gate must lie in (0, 1)");
    require(init_bond >= 1, "init_bond must be at least 1");
    require(restarts >= 1, "restarts must be at least 1");
    require(!split_max_rank || *split_max_rank >= 1, "split_max_rank must be at least 1");
    couplings.validate(couplings.tnn_mode_weights.empty() ? 1 : couplings.tnn_mode_weights.size());
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: empty list");
    if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile: p outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> learning_rates(std::size_t s, const RGConfig& cfg) {
    const double sd = static_cast<double>(s);
    return {cfg.eta0_cores * std::exp(-sd / cfg.s0), cfg.eta0_struct * (1.0 + sd / cfg.s1)};
}

double temperature(std::uint64_t t, const RGConfig& cfg) {
    return std::max(cfg.tau0 * std::exp(-static_cast<double>(t) / cfg.t0), cfg.tau_floor);
}

std::map<NodeId, double> node_tension(const TNGraph& g, const GradientBundle& data_grad) {
    std::map<NodeId, double> out;
    for (NodeId n : g.node_ids()) {
        const auto it = data_grad.cores.find(n);
        if (it == data_grad.cores.end()) throw std::invalid_argument("node_tension: gradient bundle misses a core");
        out[n] = frobenius_norm(it->second) * static_cast<double>(g.degree(n));
    }
    return out;
}

double schmidt_entropy(const TNGraph& g, EdgeId e) {
    const Edge& ed = g.edge(e);
    if (ed.bond_dim == 1) return 0.0;
    // sigma(A_u^T A_v) from the thin SVDs of the two bond unfoldings.
    const ThinSVD su = svd_thin(unfold(effective_core(g, ed.u), g.bond_mode(ed.u, e)));
    const ThinSVD sv = svd_thin(unfold(effective_core(g, ed.v), g.bond_mode(ed.v, e)));
    const std::size_t r = ed.bond_dim, ku = su.s.size(), kv = sv.s.size();
    Matrix w(ku, kv);
    for (std::size_t a = 0; a < ku; ++a)
        for (std::size_t b = 0; b < kv; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < r; ++i) acc += su.u(i, a) * sv.u(i, b);
            w(a, b) = su.s[a] * acc * sv.s[b];
        }
    const auto sigma = singular_values(w);
    double total = 0.0;
    for (double s : sigma) total += s * s;
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (double s : sigma) {
        const double p = s * s / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

std::map<EdgeId, double> edge_flow(const TNGraph& g, double tau) {
    std::map<EdgeId, double> out;
    for (const auto& [id, e] : g.edges()) {
        const double gv = gate(e.gate_weight, tau);
        out[id] = gv == 0.0 ? 0.0 : gv * schmidt_entropy(g, id);
    }
    return out;
}

std::optional<NodeId> propose_expansion(const TNGraph& g, const std::map<NodeId, double>& tensions, double pct) {
    if (tensions.empty()) return std::nullopt;
    std::vector<double> all;
    for (const auto& [n, t] : tensions) all.push_back(t);
    const double cut = percentile(all, pct);
    std::optional<NodeId> best;
    for (const auto& [n, t] : tensions) {
        if (g.core(n).tensor.order() < 2) continue;
        if (!best || t > tensions.at(*best)) best = n;
    }
    if (best && tensions.at(*best) > cut) return best;
    return std::nullopt;
}

std::optional<EdgeId> propose_compression(const TNGraph& g, const std::map<EdgeId, double>& flows, double pct) {
    if (flows.empty()) return std::nullopt;
    std::vector<double> all;
    std::optional<EdgeId> best;
    for (const auto& [e, f] : flows) {
        if (!g.has_edge(e)) throw std::invalid_argument("propose_compression: unknown edge");
        all.push_back(f);
        if (!best || f < flows.at(*best)) best = e;
    }
    if (flows.at(*best) < percentile(all, pct)) return best;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Inner optimizer

namespace {

struct Block {
    double* param;
    std::size_t size;
    bool core;
};

std::vector<Block> parameter_blocks(TNGraph& g) {
    std::vector<Block> blocks;
    for (NodeId n : g.node_ids()) {
        auto& v = g.core(n).tensor.values();
        blocks.push_back({v.data(), v.size(), true});
    }
    std::vector<std::pair<NodeId, EdgeId>> keys;
    for (const auto& [key, d] : g.diagonals()) keys.push_back(key);
    for (const auto& key : keys) {
        auto& d = g.diagonal(key.first, key.second);
        blocks.push_back({d.data(), d.size(), false});
    }
    for (EdgeId e : g.edge_ids()) blocks.push_back({&g.edge(e).gate_weight, 1, false});
    return blocks;
}

std::vector<const double*> gradient_blocks(const GradientBundle& grad) {
    std::vector<const double*> out;
    for (const auto& [n, t] : grad.cores) out.push_back(t.data().data());
    for (const auto& [key, d] : grad.diagonals) out.push_back(d.data());
    for (const auto& [e, w] : grad.gates) out.push_back(&w);
    return out;
}

bool finite(const LossBreakdown& l) { return std::isfinite(l.total); }

}  // namespace

OptimizeResult optimize(TNGraph& g, const ScaledProblem& p, std::size_t epochs, const RGConfig& cfg,
                        std::uint64_t t_start, const StepObserver& observer) {
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    const auto [lr_cores, lr_struct] = learning_rates(p.s, cfg);
    OptimizeResult res;
    auto blocks = parameter_blocks(g);
    std::vector<std::vector<double>> m, v;
    for (const auto& b : blocks) {
        m.emplace_back(b.size, 0.0);
        v.emplace_back(b.size, 0.0);
    }
    TNGraph last_good = g;
    double bc1 = 1.0, bc2 = 1.0;
    for (std::size_t step = 0; step < epochs; ++step) {
        const double tau = temperature(t_start + step, cfg);
        auto [loss, grad] = loss_and_grad(g, p.data, p.mask, p.couplings, tau, p.smoothness);
        if (!finite(loss)) {
            g = std::move(last_good);
            res.aborted = true;
            res.diagnostic = "non-finite loss at step " + std::to_string(t_start + step);
            break;
        }
        if (observer && !observer(step, loss, g)) break;
        last_good = g;
        blocks = parameter_blocks(g);
        const auto grads = gradient_blocks(grad);
        bc1 *= beta1;
        bc2 *= beta2;
        for (std::size_t i = 0; i < blocks.size(); ++i)
            kernels::adam(blocks[i].param, grads[i], m[i].data(), v[i].data(), blocks[i].size,
                          blocks[i].core ? lr_cores : lr_struct, beta1, beta2, adam_eps, 1.0 - bc1, 1.0 - bc2);
        ++res.steps;
    }
    res.loss = total_loss(g, p.data, p.mask, p.couplings, temperature(t_start + res.steps, cfg), p.smoothness);
    if (!finite(res.loss) && !res.aborted) {
        g = std::move(last_good);
        res.aborted = true;
        res.diagnostic = "non-finite loss after step " + std::to_string(t_start + res.steps);
        if (res.steps > 0) --res.steps;
        res.loss = total_loss(g, p.data, p.mask, p.couplings, temperature(t_start + res.steps, cfg), p.smoothness);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Presets and scale plumbing

TNGraph init_network(const Shape& shape, InitTopology topo, std::size_t bond, std::uint64_t seed, double rms) {
    const std::size_t n = shape.size();
    std::vector<EdgeSpec> edges;
    switch (topo) {
        case InitTopology::Chain:
            for (std::size_t k = 0; k + 1 < n; ++k) edges.push_back({int(k), int(k + 1), bond, kNewEdgeGateWeight});
            break;
        case InitTopology::Ring:
            for (std::size_t k = 0; k + 1 < n; ++k) edges.push_back({int(k), int(k + 1), bond, kNewEdgeGateWeight});
            if (n > 2) edges.push_back({0, int(n - 1), bond, kNewEdgeGateWeight});
            break;
        case InitTopology::FullyConnected:
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) edges.push_back({int(a), int(b), bond, kNewEdgeGateWeight});
            break;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double per_core = std::pow(std::max(rms, 1e-300), 1.0 / static_cast<double>(n));
    TNGraph g = TNGraph::one_per_mode(shape, edges);
    for (NodeId id : g.node_ids()) {
        double bonds = 1.0;
        for (EdgeId e : g.incident(id)) bonds *= static_cast<double>(g.edge(e).bond_dim);
        const double scale = std::pow(bonds, -0.25) * per_core;
        for (auto& x : g.core(id).tensor.values()) x = scale * normal(rng);
    }
    return g;
}

TNGraph coarsen_network(const TNGraph& g, const ScaleLevel& level) {
    if (level.s == 0) return g;
    TNGraph out(pooled_shape(g.external_shape(), level));
    for (const auto& [id, c] : g.cores()) {
        DenseTensor t = c.tensor;
        const std::size_t nb = g.degree(id);
        for (std::size_t k = 0; k < c.physical_modes.size(); ++k) {
            const std::size_t m = c.physical_modes[k];
            if (std::find(level.spatial_modes.begin(), level.spatial_modes.end(), m) == level.spatial_modes.end())
                continue;
            t = mode_product(t, nb + k, pooling_matrix(g.external_shape()[m], level.factor()));
        }
        out.add_node_with_id(id, std::move(t), c.physical_modes);
    }
    for (const auto& [id, e] : g.edges()) out.insert_edge_with_id(id, e.u, e.v, e.bond_dim, e.gate_weight);
    for (const auto& [key, d] : g.diagonals()) out.diagonal(key.first, key.second) = d;
    out.validate();
    return out;
}

DenseTensor coarse_grain_observed(const DenseTensor& data, const DenseTensor& mask, const ScaleLevel& level) {
    if (data.shape() != mask.shape()) throw ShapeError("coarse_grain_observed: mask shape mismatch");
    DenseTensor masked = data;
    for (std::size_t i = 0; i < masked.size(); ++i) masked[i] *= mask[i];
    DenseTensor num = coarse_grain(masked, level);
    const DenseTensor den = coarse_grain(mask, level);
    for (std::size_t i = 0; i < num.size(); ++i) num[i] = den[i] > 0.0 ? num[i] / den[i] : 0.0;
    return num;
}

double masked_relative_error(const DenseTensor& data, const DenseTensor& mask, const DenseTensor& x) {
    if (data.shape() != mask.shape() || data.shape() != x.shape())
        throw ShapeError("masked_relative_error: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double m = mask[i];
        num += m * m * (data[i] - x[i]) * (data[i] - x[i]);
        den += m * m * data[i] * data[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("masked_relative_error: observed data is zero");
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Search

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool both_physical(const TNGraph& g, const Edge& e) {
    return !g.core(e.u).physical_modes.empty() && !g.core(e.v).physical_modes.empty();
}

struct Candidate {
    std::string action;
    TNGraph graph;
};

class Search {
public:
    Search(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg)
        : data_(data), mask_(mask), cfg_(cfg) {
        spatial_ = cfg.spatial_modes ? *cfg.spatial_modes : default_spatial_modes(data.shape());
        for (auto m : spatial_)
            if (m >= data.order()) throw std::invalid_argument("rg_search: spatial mode out of range");
    }

    ScaleLevel level(std::size_t s) const { return {s, spatial_}; }

    SearchResult run(TNGraph g) {
        const auto start = Clock::now();
        const std::size_t S = cfg_.scales;
        bool have_best = false;
        for (std::size_t step = 0;; ++step) {
            const std::size_t s = S - step;
            if (!run_scale(g, s, s == S)) {
                finish(g, have_best, start);
                return std::move(result_);
            }
            // Best graph by masked relative error at the data scale.
            TNGraph snapshot = to_data_scale(g, s);
            const double re = masked_relative_error(data_, mask_, reconstruct(snapshot, tau()));
            result_.report.scales.back().masked_re = re;
            if (!have_best || re < result_.report.best_masked_re) {
                have_best = true;
                result_.best = std::move(snapshot);
                result_.report.best_masked_re = re;
                result_.report.best_scale = s;
            }
            if (s == 0) break;
        }
        finish(g, have_best, start);
        return std::move(result_);
    }

private:
    double tau() const { return temperature(t_, cfg_); }

    TNGraph to_data_scale(const TNGraph& g, std::size_t s) const {
        TNGraph out = g;
        for (std::size_t k = s; k > 0; --k) out = refine_network(out, level(k), level(k - 1), data_.shape());
        return out;
    }

    void finish(const TNGraph& g, bool have_best, Clock::time_point start) {
        if (!have_best) {
            std::size_t s = result_.report.scales.empty() ? cfg_.scales : result_.report.scales.back().s;
            result_.best = to_data_scale(g, s);
            result_.report.best_scale = s;
            result_.report.best_masked_re = result_.report.aborted
                                                ? std::numeric_limits<double>::quiet_NaN()
                                                : masked_relative_error(data_, mask_, reconstruct(result_.best, tau()));
        }
        result_.final = g;
        result_.report.total_steps = t_;
        result_.report.seconds = seconds_since(start);
    }

    bool abort_with(const std::string& why) {
        result_.report.aborted = true;
        result_.report.diagnostic = why;
        return false;
    }

    // Returns false when an inner run aborted.
    bool run_scale(TNGraph& g, std::size_t s, bool first) {
        const ScaleLevel lv = level(s);
        const DenseTensor fs = coarse_grain_observed(data_, mask_, lv);
        const DenseTensor ms = coarse_grain_mask(mask_, lv);
        const CouplingConstants cs = couplings_at_scale(cfg_.couplings, s);
        const ScaledProblem p{fs, ms, cs, cfg_.smoothness, s};
        ScaleTrace trace;
        trace.s = s;

        auto t0 = Clock::now();
        if (!first) g = refine_network(g, level(s + 1), lv, data_.shape());
        const std::size_t fit_epochs = first ? cfg_.epochs_initial : cfg_.epochs_refine;
        const auto fit = optimize(g, p, fit_epochs, cfg_, t_);
        t_ += fit.steps;
        trace.seconds_refine = seconds_since(t0);
        double incumbent = fit.loss.total;
        trace.accepted.push_back(fit.loss);
        result_.report.scales.push_back(trace);
        ScaleTrace& tr = result_.report.scales.back();
        if (fit.aborted) return abort_with(fit.diagnostic);

        t0 = Clock::now();
        std::set<std::pair<NodeId, Shape>> split_tabu;
        for (std::size_t round = 0; round < cfg_.expand_steps; ++round) {
            const auto grad = grad_data_loss(g, fs, ms, tau());
            auto tensions = node_tension(g, grad);
            if (cfg_.tabu)
                for (auto it = tensions.begin(); it != tensions.end();)
                    it = split_tabu.contains({it->first, g.core(it->first).tensor.shape()}) ? tensions.erase(it)
                                                                                           : std::next(it);
            const auto n = propose_expansion(g, tensions, cfg_.tension_percentile);
            if (!n) break;
            TNGraph cand = g;
            split_node(cand, *n, default_partition(cand, *n), cfg_.svd_threshold, cfg_.split_max_rank, tau());
            cand.validate();
            const auto key = std::make_pair(*n, g.core(*n).tensor.shape());
            const Outcome o = trial(g, std::move(cand), p, "expand", "split", *n, tensions.at(*n),
                                    cfg_.epochs_expand, incumbent, tr);
            if (o == Outcome::Aborted) return false;
            if (o == Outcome::Rejected) split_tabu.insert(key);
        }
        tr.seconds_expand = seconds_since(t0);

        t0 = Clock::now();
        std::set<std::pair<EdgeId, std::size_t>> tabu;
        for (std::size_t round = 0; round < cfg_.compress_steps; ++round) {
            auto flows = edge_flow(g, tau());
            if (cfg_.tabu)
                for (auto it = flows.begin(); it != flows.end();)
                    it = tabu.contains({it->first, g.edge(it->first).bond_dim}) ? flows.erase(it) : std::next(it);
            const auto e = propose_compression(g, flows, cfg_.flow_percentile);
            if (!e) break;
            const Edge edge = g.edge(*e);
            const double score = flows.at(*e);
            std::vector<Candidate> cands;
            if (!both_physical(g, edge)) {
                TNGraph c = g;
                merge_nodes(c, edge.u, edge.v, cfg_.svd_threshold, tau());
                cands.push_back({"merge", std::move(c)});
            } else if (cfg_.compression == CompressionStrategy::Threshold) {
                TNGraph c = g;
                edge_truncate(c, *e, cfg_.svd_threshold, std::nullopt, tau());
                if (c.edge(*e).bond_dim == 1) remove_unit_edge(c, *e, tau());
                if (!c.has_edge(*e) || c.edge(*e).bond_dim < edge.bond_dim) cands.push_back({"truncate", std::move(c)});
            } else {
                TNGraph c = g;
                if (edge.bond_dim > 1) edge_truncate(c, *e, 0.0, 1, tau());
                remove_unit_edge(c, *e, tau());
                cands.push_back({"drop", std::move(c)});
                if (edge.bond_dim > 2) {
                    TNGraph d = g;
                    edge_truncate(d, *e, 0.0, edge.bond_dim - 1, tau());
                    cands.push_back({"decrement", std::move(d)});
                }
            }
            bool accepted = false;
            for (auto& c : cands) {
                c.graph.validate();
                const Outcome o =
                    trial(g, std::move(c.graph), p, "compress", c.action, *e, score, cfg_.epochs_compress, incumbent, tr);
                if (o == Outcome::Aborted) return false;
                accepted = o == Outcome::Accepted;
                if (accepted) break;
            }
            if (!accepted) tabu.insert({*e, edge.bond_dim});
        }
        tr.seconds_compress = seconds_since(t0);
        return true;
    }

    enum class Outcome { Accepted, Rejected, Aborted };

    // Optimizes a candidate and swaps it in when its loss is strictly lower.
    Outcome trial(TNGraph& g, TNGraph cand, const ScaledProblem& p, const std::string& kind, const std::string& action,
                  int target, double score, std::size_t epochs, double& incumbent, ScaleTrace& tr) {
        ProposalRecord rec;
        rec.kind = kind;
        rec.action = action;
        rec.target = target;
        rec.score = score;
        rec.loss_before = incumbent;
        rec.scale = p.s;
        rec.step = t_;
        rec.params_before = param_count(g);
        const auto r = optimize(cand, p, epochs, cfg_, t_);
        rec.loss_after = r.loss.total;
        rec.params_after = param_count(cand);
        rec.accepted = !r.aborted && r.loss.total < incumbent;
        result_.report.proposals.push_back(rec);
        if (r.aborted) {
            abort_with(r.diagnostic);
            return Outcome::Aborted;
        }
        if (!rec.accepted) return Outcome::Rejected;
        g = std::move(cand);
        t_ += r.steps;
        incumbent = r.loss.total;
        tr.accepted.push_back(r.loss);
        return Outcome::Accepted;
    }

    const DenseTensor& data_;
    const DenseTensor& mask_;
    const RGConfig& cfg_;
    std::vector<std::size_t> spatial_;
    std::uint64_t t_ = 0;
    SearchResult result_;
};

}  // namespace

SearchResult rg_search(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg,
                       const std::optional<TNGraph>& init) {
    cfg.validate();
    if (data.shape() != mask.shape()) throw ShapeError("rg_search: mask shape does not match data shape");
    for (double m : mask.values())
        if (m != 0.0 && m != 1.0) throw std::invalid_argument("rg_search: mask must be binary");
    if (init) {
        if (init->external_shape() != data.shape()) throw ShapeError("rg_search: initial network shape mismatch");
        Search search(data, mask, cfg);
        return search.run(coarsen_network(*init, search.level(cfg.scales)));
    }
    double sum = 0.0, count = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        sum += mask[i] * data[i] * data[i];
        count += mask[i];
    }
    double rms = count > 0.0 ? std::sqrt(sum / count) : 1.0;
    if (!(rms > 0.0)) rms = 1.0;
    std::optional<SearchResult> winner;
    double winner_loss = 0.0;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        RGConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + r;
        Search search(data, mask, run_cfg);
        TNGraph g = init_network(pooled_shape(data.shape(), search.level(cfg.scales)), cfg.init, cfg.init_bond,
                                 run_cfg.seed, rms);
        SearchResult res = search.run(std::move(g));
        const double loss = res.report.aborted || res.report.scales.empty()
                                ? std::numeric_limits<double>::infinity()
                                : res.report.scales.back().accepted.back().total;
        if (!winner || loss < winner_loss) {
            winner = std::move(res);
            winner_loss = loss;
        }
    }
    return std::move(*winner);
}

TNGraph warm_start(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg) {
    return rg_search(data, mask, cfg).best;
}

BoundedSearch rg_search_to_bound(const DenseTensor& data, const DenseTensor& mask, const RGConfig& cfg,
                                 double re_bound, std::size_t max_bond) {
    if (max_bond < cfg.init_bond) throw std::invalid_argument("rg_search_to_bound: max_bond below init_bond");
    BoundedSearch out;
    for (std::size_t b = cfg.init_bond; b <= max_bond; ++b) {
        RGConfig run = cfg;
        run.init_bond = b;
        out.result = rg_search(data, mask, run);
        out.init_bond = b;
        out.re = out.result.report.best_masked_re;
        out.tried.push_back({b, out.re});
        if (out.re <= re_bound) {
            out.met = true;
            break;
        }
        if (out.result.report.aborted) break;
    }
    return out;
}

void write_report(std::ostream& os, const RGReport& report) {
    using nlohmann::json;
    auto loss_json = [](const LossBreakdown& l) {
        return json{{"data", l.data},     {"temporal", l.temporal},         {"spatial", l.spatial},
                    {"diag", l.diag_sparsity}, {"entropy", l.edge_entropy}, {"tnn", l.tnn},
                    {"total", l.total}};
    };
    json scales = json::array();
    for (const auto& s : report.scales) {
        json trace = json::array();
        for (const auto& l : s.accepted) trace.push_back(loss_json(l));
        scales.push_back({{"scale", s.s},
                          {"accepted", trace},
                          {"masked_re", s.masked_re},
                          {"seconds_expand", s.seconds_expand},
                          {"seconds_compress", s.seconds_compress},
                          {"seconds_refine", s.seconds_refine}});
    }
    json props = json::array();
    for (const auto& p : report.proposals)
        props.push_back({{"kind", p.kind},
                         {"action", p.action},
                         {"target", p.target},
                         {"score", p.score},
                         {"loss_before", p.loss_before},
                         {"loss_after", p.loss_after},
                         {"accepted", p.accepted},
                         {"scale", p.scale},
                         {"step", p.step},
                         {"params_before", p.params_before},
                         {"params_after", p.params_after}});
    json doc{{"scales", scales},
             {"proposals", props},
             {"best_scale", report.best_scale},
             {"best_masked_re", report.best_masked_re},
             {"total_steps", report.total_steps},
             {"aborted", report.aborted},
             {"diagnostic", report.diagnostic},
             {"seconds", report.seconds}};
    os << doc.dump(2) << '\n';
}

std::string to_string(InitTopology t) {
    switch (t) {
        case InitTopology::Ring: return "ring";
        case InitTopology::Chain: return "chain";
        case InitTopology::FullyConnected: return "full";
    }
    return "ring";
}

std::string to_string(CompressionStrategy c) {
    return c == CompressionStrategy::Threshold ? "threshold" : "drop_then_decrement";
}

InitTopology parse_init_topology(const std::string& s) {
    if (s == "ring") return InitTopology::Ring;
    if (s == "chain") return InitTopology::Chain;
    if (s == "full") return InitTopology::FullyConnected;
    throw std::invalid_argument("unknown init topology '" + s + "' (expected ring, chain or full)");
}

CompressionStrategy parse_compression_strategy(const std::string& s) {
    if (s == "threshold") return CompressionStrategy::Threshold;
    if (s == "drop_then_decrement") return CompressionStrategy::DropThenDecrement;
    throw std::invalid_argument("unknown compression strategy '" + s + "' (expected threshold or drop_then_decrement)");
}

}  // namespace rgtn
