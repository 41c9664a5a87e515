#pragma once
// Reference implementations used only by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "rgtn/tensor.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const rgtn::Matrix& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
    return out;
}

inline rgtn::Matrix from_eigen(const Eigen::MatrixXd& m) {
    rgtn::Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

inline std::vector<double> singular_values(const rgtn::Matrix& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const auto& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

inline rgtn::DenseTensor random_tensor(const rgtn::Shape& shape, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    rgtn::DenseTensor t(shape);
    for (auto& x : t.values()) x = n(rng);
    return t;
}

inline rgtn::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    rgtn::Matrix m(r, c);
    for (auto& x : m.data) x = n(rng);
    return m;
}

/// Multi-index odometer over a shape, last index fastest.
inline bool next_index(std::vector<std::size_t>& idx, const rgtn::Shape& shape) {
    for (std::size_t k = shape.size(); k-- > 0;) {
        if (++idx[k] < shape[k]) return true;
        idx[k] = 0;
    }
    return false;
}

inline double rel_diff(const rgtn::DenseTensor& a, const rgtn::DenseTensor& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace oracle

#include "rgtn/tn_graph.hpp"

namespace oracle {

/// Brute-force reconstruction: enumerates every external index and, per
/// edge, independent u-side and v-side bond indices weighted by
/// D_u[i] * B(i, j) * D_v[j] with an explicitly materialized B.
inline rgtn::DenseTensor naive_reconstruct(const rgtn::TNGraph& g, double tau) {
    using namespace rgtn;
    const auto& ext = g.external_shape();
    std::vector<EdgeId> eids = g.edge_ids();
    std::map<EdgeId, Matrix> bmat;
    for (EdgeId e : eids) {
        const auto& ed = g.edge(e);
        const double gv = 1.0 / (1.0 + std::exp(-ed.gate_weight / tau));
        Matrix b(ed.bond_dim, ed.bond_dim);
        for (std::size_t i = 0; i < ed.bond_dim; ++i)
            for (std::size_t j = 0; j < ed.bond_dim; ++j)
                b(i, j) = (i == j ? gv : 0.0) + (1.0 - gv) / static_cast<double>(ed.bond_dim);
        bmat[e] = b;
    }
    Shape bond_shape;  // two indices per edge: u side, v side
    for (EdgeId e : eids) {
        bond_shape.push_back(g.edge(e).bond_dim);
        bond_shape.push_back(g.edge(e).bond_dim);
    }
    DenseTensor out(ext);
    std::vector<std::size_t> xi(ext.size(), 0);
    do {
        double total = 0.0;
        std::vector<std::size_t> bi(bond_shape.size(), 0);
        do {
            double w = 1.0;
            for (std::size_t k = 0; k < eids.size(); ++k) {
                const auto& ed = g.edge(eids[k]);
                const std::size_t i = bi[2 * k], j = bi[2 * k + 1];
                w *= g.diagonal(ed.u, eids[k])[i] * bmat[eids[k]](i, j) * g.diagonal(ed.v, eids[k])[j];
            }
            for (const auto& [id, c] : g.cores()) {
                std::vector<std::size_t> idx;
                for (EdgeId e : g.incident(id)) {
                    const std::size_t k = static_cast<std::size_t>(std::find(eids.begin(), eids.end(), e) - eids.begin());
                    idx.push_back(g.edge(e).u == id ? bi[2 * k] : bi[2 * k + 1]);
                }
                for (auto m : c.physical_modes) idx.push_back(xi[m]);
                if (idx.empty()) idx.push_back(0);
                w *= c.tensor[c.tensor.offset(idx)];
            }
            total += w;
        } while (!bond_shape.empty() && next_index(bi, bond_shape));
        out[out.offset(xi)] = total;
    } while (next_index(xi, ext));
    return out;
}

/// Random simple graph over n one-per-mode nodes with random bonds.
inline rgtn::TNGraph random_graph(std::size_t n, std::mt19937_64& rng, std::size_t max_dim = 3,
                                  std::size_t max_bond = 2, double edge_prob = 0.5) {
    std::uniform_int_distribution<std::size_t> dim(1, max_dim), bond(1, max_bond);
    std::bernoulli_distribution coin(edge_prob);
    rgtn::Shape ext(n);
    for (auto& d : ext) d = dim(rng);
    std::vector<rgtn::EdgeSpec> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (coin(rng))
                edges.push_back({static_cast<int>(a), static_cast<int>(b), bond(rng), rgtn::kTransparentGateWeight});
    return rgtn::TNGraph::one_per_mode(ext, edges, [&](int, const rgtn::Shape& s) { return random_tensor(s, rng); });
}

}  // namespace oracle
