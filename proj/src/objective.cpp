#include "rgtn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rgtn/kernels.hpp"
#include "rgtn/linalg.hpp"
#include "rgtn/network.hpp"

namespace rgtn {

void CouplingConstants::validate(std::size_t order) const {
    for (double v : {alpha, beta, gamma, delta, epsilon})
        if (!(v >= 0.0)) throw std::invalid_argument("coupling constants must be non-negative");
    for (double v : {rho_alpha, rho_beta, rho_gamma, rho_delta, rho_epsilon})
        if (!(v >= 0.0)) throw std::invalid_argument("coupling multipliers must be non-negative");
    (void)mode_weights(order);
}

std::vector<double> CouplingConstants::mode_weights(std::size_t order) const {
    if (tnn_mode_weights.empty()) return std::vector<double>(order, 1.0 / static_cast<double>(order));
    if (tnn_mode_weights.size() != order)
        throw std::invalid_argument("tnn_mode_weights: expected " + std::to_string(order) + " weights");
    double sum = 0.0;
    for (double w : tnn_mode_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("tnn_mode_weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("tnn_mode_weights must sum to 1");
    return tnn_mode_weights;
}

CouplingConstants couplings_at_scale(const CouplingConstants& base, std::size_t s) {
    CouplingConstants c = base;
    const double e = static_cast<double>(s);
    c.alpha = base.alpha * std::pow(base.rho_alpha, e);
    c.beta = base.beta * std::pow(base.rho_beta, e);
    c.gamma = base.gamma * std::pow(base.rho_gamma, e);
    c.delta = base.delta * std::pow(base.rho_delta, e);
    c.epsilon = base.epsilon * std::pow(base.rho_epsilon, e);
    return c;
}

double binary_entropy(double g) {
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("binary_entropy: argument outside [0, 1]");
    double h = 0.0;
    if (g > 0.0) h -= g * std::log(g);
    if (g < 1.0) h -= (1.0 - g) * std::log1p(-g);
    return h;
}

double soft_threshold(double z, double theta) {
    if (!(theta >= 0.0)) throw std::invalid_argument("soft_threshold: negative threshold");
    const double m = std::abs(z) - theta;
    if (m <= 0.0) return 0.0;
    return z < 0.0 ? -m : m;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Entropy of sigma(z) and its derivative in z, both stable for large |z|.
double gate_entropy(double z) {
    const double g = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return g * softplus(-z) + (1.0 - g) * softplus(z);
}

double gate_slope(double z) {
    // sigma(z) * sigma(-z)
    const double a = std::exp(-std::abs(z));
    return a / ((1.0 + a) * (1.0 + a));
}

void check_shapes(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask) {
    if (data.shape() != g.external_shape())
        throw ShapeError("loss: data shape " + shape_to_string(data.shape()) + " does not match network shape " +
                         shape_to_string(g.external_shape()));
    if (mask.shape() != data.shape()) throw ShapeError("loss: mask shape does not match data shape");
}

// Views a tensor as (outer, n, inner) around `mode`.
struct ModeView {
    std::size_t outer = 1, n = 1, inner = 1;
    ModeView(const Shape& shape, std::size_t mode) {
        if (mode >= shape.size()) throw ShapeError("mode index out of range");
        n = shape[mode];
        for (std::size_t k = 0; k < mode; ++k) outer *= shape[k];
        for (std::size_t k = mode + 1; k < shape.size(); ++k) inner *= shape[k];
    }
};

// Forward difference along `mode` (shape loses one slice), and optionally
// adds c * d||diff||/dX into grad.
double difference_norm(const DenseTensor& x, std::size_t mode, DenseTensor* grad, double c) {
    const ModeView v(x.shape(), mode);
    if (v.n < 2) return 0.0;
    std::vector<double> diff(v.outer * (v.n - 1) * v.inner);
    std::size_t p = 0;
    for (std::size_t o = 0; o < v.outer; ++o)
        for (std::size_t j = 0; j + 1 < v.n; ++j) {
            const double* a = x.data().data() + (o * v.n + j) * v.inner;
            for (std::size_t i = 0; i < v.inner; ++i) diff[p++] = a[i + v.inner] - a[i];
        }
    const double norm = std::sqrt(kernels::sumsq(diff.data(), diff.size()));
    if (grad && norm > 0.0) {
        const double s = c / norm;
        p = 0;
        for (std::size_t o = 0; o < v.outer; ++o)
            for (std::size_t j = 0; j + 1 < v.n; ++j) {
                double* gp = grad->data().data() + (o * v.n + j) * v.inner;
                for (std::size_t i = 0; i < v.inner; ++i, ++p) {
                    gp[i + v.inner] += s * diff[p];
                    gp[i] -= s * diff[p];
                }
            }
    }
    return norm;
}

double temporal_term(const DenseTensor& x, std::size_t mode, DenseTensor* grad, double c) {
    const ModeView v(x.shape(), mode);
    double total = 0.0;
    std::vector<double> diff(v.outer * v.inner);
    for (std::size_t t = 0; t + 1 < v.n; ++t) {
        std::size_t p = 0;
        for (std::size_t o = 0; o < v.outer; ++o) {
            const double* a = x.data().data() + (o * v.n + t) * v.inner;
            for (std::size_t i = 0; i < v.inner; ++i) diff[p++] = a[i + v.inner] - a[i];
        }
        const double norm = std::sqrt(kernels::sumsq(diff.data(), diff.size()));
        total += norm;
        if (grad && norm > 0.0) {
            const double s = c / norm;
            p = 0;
            for (std::size_t o = 0; o < v.outer; ++o) {
                double* gp = grad->data().data() + (o * v.n + t) * v.inner;
                for (std::size_t i = 0; i < v.inner; ++i, ++p) {
                    gp[i + v.inner] += s * diff[p];
                    gp[i] -= s * diff[p];
                }
            }
        }
    }
    return total;
}

// Singular values below this fraction of the largest are treated as exact
// zeros when forming the nuclear-norm subgradient.
constexpr double kTnnRankTolerance = 1e-9;

double tnn_term(const DenseTensor& x, const std::vector<double>& weights, DenseTensor* grad, double c) {
    if (weights.size() != x.order()) throw std::invalid_argument("tnn: expected one weight per mode");
    double total = 0.0;
    for (std::size_t k = 0; k < x.order(); ++k) {
        if (weights[k] == 0.0) continue;
        const Matrix m = unfold(x, k);
        if (!grad) {
            total += weights[k] * nuclear_norm(m);
            continue;
        }
        const ThinSVD svd = svd_thin(m);
        double nn = 0.0;
        for (double s : svd.s) nn += s;
        total += weights[k] * nn;
        if (svd.s.empty() || svd.s[0] <= 0.0) continue;
        std::size_t r = 0;
        while (r < svd.s.size() && svd.s[r] > kTnnRankTolerance * svd.s[0]) ++r;
        Matrix uvt(m.rows, m.cols);
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t q = 0; q < r; ++q) {
                const double u = svd.u(i, q);
                if (u != 0.0) kernels::axpy(u, svd.vt.row(q), uvt.row(i), m.cols);
            }
        const DenseTensor gk = fold(uvt, k, x.shape());
        kernels::axpy(c * weights[k], gk.data().data(), grad->data().data(), gk.size());
    }
    return total;
}

double data_term(const DenseTensor& x, const DenseTensor& data, const DenseTensor& mask, DenseTensor* grad) {
    double sum = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double m = mask[i];
        const double r = m * (x[i] - data[i]);
        sum += r * r;
        if (grad) (*grad)[i] += m * r;
    }
    return 0.5 * sum;
}

struct StructuralTerms {
    double l1 = 0.0;
    double entropy = 0.0;
};

StructuralTerms structural_terms(const TNGraph& g, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("loss: temperature must be positive");
    StructuralTerms s;
    for (const auto& [key, d] : g.diagonals())
        for (double v : d) s.l1 += std::abs(v);
    for (const auto& [id, e] : g.edges()) s.entropy += gate_entropy(e.gate_weight / tau);
    return s;
}

int physical_label(std::size_t mode) { return -1 - static_cast<int>(mode); }

struct GatedOperand {
    DenseTensor effective;            // core with diagonals
    DenseTensor product;              // effective core with u-side bond operators applied
    std::vector<int> labels;
    std::vector<std::size_t> gated_modes;
    std::vector<EdgeId> gated_edges;
    std::vector<Matrix> operators;
};

std::vector<GatedOperand> build_operands(const TNGraph& g, double tau) {
    std::vector<GatedOperand> ops;
    for (NodeId n : g.node_ids()) {
        GatedOperand op;
        op.effective = effective_core(g, n);
        op.product = op.effective;
        const auto inc = g.incident(n);
        for (std::size_t k = 0; k < inc.size(); ++k) {
            const Edge& e = g.edge(inc[k]);
            op.labels.push_back(inc[k]);
            if (e.u != n || e.bond_dim == 1) continue;
            const double gv = gate(e.gate_weight, tau);
            if (gv == 1.0) continue;
            op.operators.push_back(bond_operator(gv, e.bond_dim));
            op.gated_modes.push_back(k);
            op.gated_edges.push_back(inc[k]);
            op.product = mode_product(op.product, k, op.operators.back());
        }
        for (auto m : g.core(n).physical_modes) op.labels.push_back(physical_label(m));
        if (op.labels.empty()) {
            op.effective = op.effective.reshaped({1});
            op.product = op.product.reshaped({1});
        }
        ops.push_back(std::move(op));
    }
    return ops;
}

DenseTensor contract_operands(const std::vector<GatedOperand>& ops, std::size_t order, std::size_t skip,
                              const DenseTensor* extra) {
    std::vector<LabeledTensor> list;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i == skip) continue;
        list.push_back({ops[i].product, ops[i].labels});
    }
    std::vector<int> physical;
    for (std::size_t m = 0; m < order; ++m) physical.push_back(physical_label(m));
    if (extra) list.push_back({*extra, physical});
    if (skip < ops.size()) return contract_network(std::move(list), ops[skip].labels);
    return contract_network(std::move(list), physical);
}

// All modes of t except `mode`.
std::vector<std::size_t> other_modes(std::size_t order, std::size_t mode) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < order; ++k)
        if (k != mode) out.push_back(k);
    return out;
}

GradientBundle backprop(const TNGraph& g, const std::vector<GatedOperand>& ops, const DenseTensor& dx, double tau) {
    GradientBundle out;
    const auto nodes = g.node_ids();
    for (const auto& [id, e] : g.edges()) out.gates[id] = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeId n = nodes[i];
        const GatedOperand& op = ops[i];
        const Core& core = g.core(n);
        DenseTensor dprod = contract_operands(ops, g.external_shape().size(), i, &dx);
        dprod = std::move(dprod).reshaped(op.product.shape());

        // Through the bond operators (symmetric matrices).
        DenseTensor deff = dprod;
        for (std::size_t j = 0; j < op.operators.size(); ++j) deff = mode_product(deff, op.gated_modes[j], op.operators[j]);
        for (std::size_t j = 0; j < op.operators.size(); ++j) {
            DenseTensor q = op.effective;
            for (std::size_t l = 0; l < op.operators.size(); ++l)
                if (l != j) q = mode_product(q, op.gated_modes[l], op.operators[l]);
            const std::size_t k = op.gated_modes[j];
            const auto rest = other_modes(q.order(), k);
            const DenseTensor db = contract(q, rest, dprod, rest);
            const std::size_t r = op.operators[j].rows;
            double trace = 0.0, sum = 0.0;
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b) {
                    sum += db[a * r + b];
                    if (a == b) trace += db[a * r + b];
                }
            const Edge& e = g.edge(op.gated_edges[j]);
            const double slope = gate_slope(e.gate_weight / tau) / tau;
            out.gates[e.id] += (trace - sum / static_cast<double>(r)) * slope;
        }

        // Through the diagonal factors.
        deff = std::move(deff).reshaped(core.tensor.shape());
        const auto inc = g.incident(n);
        DenseTensor dcore = deff;
        for (std::size_t k = 0; k < inc.size(); ++k) dcore = scale_mode(dcore, k, g.diagonal(n, inc[k]));
        for (std::size_t k = 0; k < inc.size(); ++k) {
            DenseTensor partial = core.tensor;
            for (std::size_t l = 0; l < inc.size(); ++l)
                if (l != k) partial = scale_mode(partial, l, g.diagonal(n, inc[l]));
            const ModeView v(partial.shape(), k);
            std::vector<double> dd(v.n, 0.0);
            for (std::size_t o = 0; o < v.outer; ++o)
                for (std::size_t j = 0; j < v.n; ++j) {
                    const std::size_t off = (o * v.n + j) * v.inner;
                    dd[j] += kernels::dot(partial.data().data() + off, deff.data().data() + off, v.inner);
                }
            out.diagonals[{n, inc[k]}] = std::move(dd);
        }
        out.cores.emplace(n, std::move(dcore));
    }
    return out;
}

struct Evaluation {
    LossBreakdown loss;
    DenseTensor dx;
    std::vector<GatedOperand> ops;
};

Evaluation evaluate(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask, const CouplingConstants& c,
                    double tau, const SmoothnessModes& modes, bool with_grad) {
    check_shapes(g, data, mask);
    c.validate(data.order());
    Evaluation ev;
    ev.ops = build_operands(g, tau);
    const DenseTensor x =
        contract_operands(ev.ops, g.external_shape().size(), ev.ops.size(), nullptr).reshaped(g.external_shape());
    DenseTensor* grad = nullptr;
    if (with_grad) {
        ev.dx = DenseTensor(x.shape());
        grad = &ev.dx;
    }
    LossBreakdown& l = ev.loss;
    l.data = data_term(x, data, mask, grad);
    auto active = [grad](double coupling) { return coupling > 0.0 ? grad : nullptr; };
    if (modes.temporal) l.temporal = temporal_term(x, *modes.temporal, active(c.alpha), c.alpha);
    if (modes.spatial)
        for (auto m : *modes.spatial) l.spatial += difference_norm(x, m, active(c.beta), c.beta);
    l.tnn = tnn_term(x, c.mode_weights(x.order()), active(c.epsilon), c.epsilon);
    const StructuralTerms st = structural_terms(g, tau);
    l.diag_sparsity = st.l1;
    l.edge_entropy = st.entropy;
    l.total = l.data + c.alpha * l.temporal + c.beta * l.spatial + c.gamma * l.diag_sparsity +
              c.delta * l.edge_entropy + c.epsilon * l.tnn;
    return ev;
}

}  // namespace

double tnn(const DenseTensor& x, const std::vector<double>& weights) { return tnn_term(x, weights, nullptr, 0.0); }

double temporal_variation(const DenseTensor& x, std::size_t mode) { return temporal_term(x, mode, nullptr, 0.0); }

double spatial_variation(const DenseTensor& x, const std::array<std::size_t, 2>& modes) {
    return difference_norm(x, modes[0], nullptr, 0.0) + difference_norm(x, modes[1], nullptr, 0.0);
}

LossBreakdown total_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask,
                         const CouplingConstants& c, double tau, const SmoothnessModes& modes) {
    return evaluate(g, data, mask, c, tau, modes, false).loss;
}

std::pair<LossBreakdown, GradientBundle> loss_and_grad(const TNGraph& g, const DenseTensor& data,
                                                       const DenseTensor& mask, const CouplingConstants& c,
                                                       double tau, const SmoothnessModes& modes) {
    Evaluation ev = evaluate(g, data, mask, c, tau, modes, true);
    GradientBundle grad = backprop(g, ev.ops, ev.dx, tau);
    for (auto& [key, d] : grad.diagonals) {
        const auto& dv = g.diagonal(key.first, key.second);
        for (std::size_t j = 0; j < d.size(); ++j) {
            const double s = dv[j] > 0.0 ? 1.0 : (dv[j] < 0.0 ? -1.0 : 0.0);
            d[j] += c.gamma * s;
        }
    }
    for (auto& [id, dw] : grad.gates) {
        const double z = g.edge(id).gate_weight / tau;
        // dH/dz = ln((1 - g) / g) * g (1 - g) = -z * g (1 - g)
        dw += c.delta * (-z * gate_slope(z)) / tau;
    }
    return {ev.loss, std::move(grad)};
}

GradientBundle grad_total_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask,
                               const CouplingConstants& c, double tau, const SmoothnessModes& modes) {
    return loss_and_grad(g, data, mask, c, tau, modes).second;
}

GradientBundle grad_data_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask, double tau) {
    CouplingConstants none;
    none.gamma = none.delta = none.epsilon = 0.0;
    return grad_total_loss(g, data, mask, none, tau, {});
}

GradientBundle backprop_reconstruction(const TNGraph& g, const DenseTensor& dx, double tau) {
    if (dx.shape() != g.external_shape()) throw ShapeError("backprop_reconstruction: gradient shape mismatch");
    return backprop(g, build_operands(g, tau), dx, tau);
}

}  // namespace rgtn
