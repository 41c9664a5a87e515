#include "rgtn/scale_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgtn {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_modes(const ScaleLevel& level, std::size_t order) {
    for (auto m : level.spatial_modes)
        if (m >= order) throw ShapeError("scale level: spatial mode " + std::to_string(m) + " out of range");
}

}  // namespace

std::vector<std::size_t> default_spatial_modes(const Shape& shape) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < shape.size(); ++k)
        if (shape[k] >= 16) out.push_back(k);
    return out;
}

Shape pooled_shape(const Shape& shape, const ScaleLevel& level) {
    check_modes(level, shape.size());
    Shape out = shape;
    for (auto m : level.spatial_modes) out[m] = ceil_div(shape[m], level.factor());
    return out;
}

Matrix pooling_matrix(std::size_t n, std::size_t window) {
    const std::size_t cells = ceil_div(n, window);
    Matrix p(n, cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t lo = c * window, hi = std::min(n, lo + window);
        for (std::size_t i = lo; i < hi; ++i) p(i, c) = 1.0 / static_cast<double>(hi - lo);
    }
    return p;
}

Matrix interpolation_matrix(std::size_t fine, std::size_t window) {
    const std::size_t coarse = ceil_div(fine, window);
    Matrix m(coarse, fine);
    std::vector<double> centre(coarse);
    for (std::size_t c = 0; c < coarse; ++c) {
        const std::size_t lo = c * window, hi = std::min(fine, lo + window);
        centre[c] = 0.5 * static_cast<double>(lo + hi - 1);
    }
    for (std::size_t x = 0; x < fine; ++x) {
        const double pos = static_cast<double>(x);
        if (coarse == 1 || pos <= centre.front()) {
            m(0, x) = 1.0;
        } else if (pos >= centre.back()) {
            m(coarse - 1, x) = 1.0;
        } else {
            std::size_t c = 0;
            while (centre[c + 1] < pos) ++c;
            const double t = (pos - centre[c]) / (centre[c + 1] - centre[c]);
            m(c, x) = 1.0 - t;
            m(c + 1, x) = t;
        }
    }
    return m;
}

DenseTensor coarse_grain(const DenseTensor& t, const ScaleLevel& level) {
    check_modes(level, t.order());
    DenseTensor out = t;
    if (level.s == 0) return out;
    for (auto m : level.spatial_modes) out = mode_product(out, m, pooling_matrix(t.dim(m), level.factor()));
    return out;
}

DenseTensor coarse_grain_mask(const DenseTensor& mask, const ScaleLevel& level) {
    for (double x : mask.values())
        if (x != 0.0 && x != 1.0) throw std::invalid_argument("coarse_grain_mask: mask entries must be 0 or 1");
    DenseTensor frac = coarse_grain(mask, level);
    // Window fractions are exact multiples of 1/size; the slack only guards
    // against rounding in the separable averages.
    for (auto& x : frac.values()) x = x >= 0.5 - 1e-12 ? 1.0 : 0.0;
    return frac;
}

DenseTensor upsample(const DenseTensor& t, const ScaleLevel& level, const Shape& target_shape) {
    if (target_shape.size() != t.order()) throw ShapeError("upsample: order mismatch");
    if (pooled_shape(target_shape, level) != t.shape())
        throw ShapeError("upsample: tensor shape " + shape_to_string(t.shape()) + " is not the pooled shape of " +
                         shape_to_string(target_shape));
    DenseTensor out = t;
    if (level.s == 0) return out;
    for (auto m : level.spatial_modes) out = mode_product(out, m, interpolation_matrix(target_shape[m], level.factor()));
    return out;
}

TNGraph refine_network(const TNGraph& g, const ScaleLevel& from, const ScaleLevel& to, const Shape& base_shape) {
    if (from.s != to.s + 1) throw std::invalid_argument("refine_network: scales are not adjacent");
    if (from.spatial_modes != to.spatial_modes) throw std::invalid_argument("refine_network: spatial modes differ");
    if (g.external_shape() != pooled_shape(base_shape, from))
        throw ShapeError("refine_network: graph is not sized for the coarser scale");
    const Shape fine = pooled_shape(base_shape, to);
    TNGraph out(fine);
    for (const auto& [id, c] : g.cores()) {
        DenseTensor t = c.tensor;
        const std::size_t nb = g.degree(id);
        for (std::size_t k = 0; k < c.physical_modes.size(); ++k) {
            const std::size_t m = c.physical_modes[k];
            if (std::find(from.spatial_modes.begin(), from.spatial_modes.end(), m) == from.spatial_modes.end()) continue;
            t = mode_product(t, nb + k, interpolation_matrix(fine[m], 2));
        }
        out.add_node_with_id(id, std::move(t), c.physical_modes);
    }
    for (const auto& [id, e] : g.edges()) out.insert_edge_with_id(id, e.u, e.v, e.bond_dim, e.gate_weight);
    for (const auto& [key, d] : g.diagonals()) out.diagonal(key.first, key.second) = d;
    out.validate();
    return out;
}

}  // namespace rgtn
