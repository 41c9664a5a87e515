#pragma once
// Coarse-graining of data and masks by mean pooling over windows of 2^s
// along the spatial modes, linear upsampling back, and refinement of a
// network's physical legs from one scale to the next finer one.

#include <cstddef>
#include <vector>

#include "rgtn/tensor.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

struct ScaleLevel {
    std::size_t s = 0;
    std::vector<std::size_t> spatial_modes;

    std::size_t factor() const { return std::size_t{1} << s; }
};

/// Modes of size >= 16.
std::vector<std::size_t> default_spatial_modes(const Shape& shape);

/// ceil(size / 2^s) on spatial modes.
Shape pooled_shape(const Shape& shape, const ScaleLevel& level);

/// Pooling matrix (n x ceil(n/w)) whose column c averages window c.
Matrix pooling_matrix(std::size_t n, std::size_t window);
/// Linear interpolation matrix (coarse x fine) for mode_product; coarse cell
/// c sits at the centre of its window, ends are clamped.
Matrix interpolation_matrix(std::size_t fine, std::size_t window);

DenseTensor coarse_grain(const DenseTensor& t, const ScaleLevel& level);
/// A pooled cell is observed when at least half of its window is.
DenseTensor coarse_grain_mask(const DenseTensor& mask, const ScaleLevel& level);
DenseTensor upsample(const DenseTensor& t, const ScaleLevel& level, const Shape& target_shape);

/// Interpolates every physical spatial leg from the pooled size at `from`
/// to the pooled size at `to` (one scale finer). `base_shape` is the finest
/// external shape. Bonds, gates and diagonals are untouched.
TNGraph refine_network(const TNGraph& g, const ScaleLevel& from, const ScaleLevel& to, const Shape& base_shape);

}  // namespace rgtn
