#pragma once
// Central finite-difference check of grad_total_loss on random instances.

#include <cmath>
#include <random>
#include <string>

#include "oracles.hpp"
#include "rgtn/objective.hpp"

namespace oracle {

struct LossInstance {
    rgtn::TNGraph graph;
    rgtn::DenseTensor data;
    rgtn::DenseTensor mask;
    rgtn::CouplingConstants couplings;
    rgtn::SmoothnessModes modes;
    double tau = 0.7;
};

/// Up to 4 nodes over up to 4 modes, random gates and diagonals, a random
/// mask, and every loss term switched on (smoothness terms need 3 modes).
inline LossInstance random_loss_instance(std::mt19937_64& rng) {
    using namespace rgtn;
    std::uniform_int_distribution<std::size_t> order_dist(3, 4);
    const std::size_t order = order_dist(rng);
    LossInstance inst;
    for (;;) {
        inst.graph = random_graph(order, rng, 4, 3, 0.7);
        if (inst.graph.edge_count() > 0) break;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.3, 1.5);
    std::bernoulli_distribution coin(0.5);
    for (EdgeId e : inst.graph.edge_ids()) inst.graph.edge(e).gate_weight = normal(rng);
    for (const auto& [key, d] : inst.graph.diagonals()) {
        auto& dv = inst.graph.diagonal(key.first, key.second);
        for (auto& v : dv) v = coin(rng) ? mag(rng) : -mag(rng);
    }
    const Shape& shape = inst.graph.external_shape();
    inst.data = random_tensor(shape, rng);
    inst.mask = DenseTensor(shape);
    std::bernoulli_distribution observed(0.7);
    for (auto& v : inst.mask.values()) v = observed(rng) ? 1.0 : 0.0;
    inst.couplings.alpha = 0.3;
    inst.couplings.beta = 0.2;
    inst.couplings.gamma = 0.05;
    inst.couplings.delta = 0.04;
    inst.couplings.epsilon = 0.1;
    inst.modes.temporal = 0;
    inst.modes.spatial = std::array<std::size_t, 2>{1, 2};
    std::uniform_real_distribution<double> tau(0.3, 1.0);
    inst.tau = tau(rng);
    return inst;
}

struct FdReport {
    std::size_t checked = 0;
    std::size_t failures = 0;
    double worst_rel = 0.0;
    std::string first_failure;
};

/// Compares every gradient entry with (L(p + h) - L(p - h)) / 2h.
inline FdReport finite_difference_check(const LossInstance& inst, double step = 1e-5, double rel_tol = 1e-4,
                                        double abs_tol = 1e-6) {
    using namespace rgtn;
    const GradientBundle grad =
        grad_total_loss(inst.graph, inst.data, inst.mask, inst.couplings, inst.tau, inst.modes);
    FdReport rep;
    auto loss_at = [&](const TNGraph& g) {
        return total_loss(g, inst.data, inst.mask, inst.couplings, inst.tau, inst.modes).total;
    };
    auto compare = [&](double analytic, double& slot, TNGraph& g, const std::string& what) {
        const double saved = slot;
        slot = saved + step;
        const double up = loss_at(g);
        slot = saved - step;
        const double down = loss_at(g);
        slot = saved;
        const double fd = (up - down) / (2.0 * step);
        const double err = std::abs(fd - analytic);
        const double scale = std::max(std::abs(fd), std::abs(analytic));
        ++rep.checked;
        if (scale > 0.0) rep.worst_rel = std::max(rep.worst_rel, err / scale);
        if (err > std::max(abs_tol, rel_tol * scale)) {
            if (rep.failures++ == 0)
                rep.first_failure = what + ": analytic " + std::to_string(analytic) + " vs fd " + std::to_string(fd);
        }
    };
    TNGraph g = inst.graph;
    for (NodeId n : g.node_ids()) {
        auto& values = g.core(n).tensor.values();
        const auto& gc = grad.cores.at(n);
        for (std::size_t i = 0; i < values.size(); ++i)
            compare(gc[i], values[i], g, "core " + std::to_string(n) + "[" + std::to_string(i) + "]");
    }
    for (const auto& [key, gd] : grad.diagonals) {
        auto& d = g.diagonal(key.first, key.second);
        for (std::size_t j = 0; j < d.size(); ++j)
            compare(gd[j], d[j], g, "diag (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    }
    for (const auto& [e, gw] : grad.gates) compare(gw, g.edge(e).gate_weight, g, "gate " + std::to_string(e));
    return rep;
}

}  // namespace oracle
