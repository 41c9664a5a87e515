#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rgtn/tensor.hpp"

namespace rgtn {

/// Thin SVD m = U diag(s) V^T with all min(m, n) singular values,
/// sorted non-increasing. Columns of U belonging to zero singular values are
/// left as zero vectors.
struct ThinSVD {
    Matrix u;                    // m x k
    std::vector<double> s;       // k
    Matrix vt;                   // k x n
};

/// One-sided (Hestenes) Jacobi SVD, applied to the transpose when the matrix
/// is wide so that the rotated vectors are always the shorter side.
ThinSVD svd_thin(const Matrix& m);
std::vector<double> singular_values(const Matrix& m);

struct TruncatedSVD {
    Matrix left;                 // U, m x r
    std::vector<double> singular;
    Matrix right;                // V^T, r x n
    std::size_t rank = 0;
    /// Zero input: rank 1, singular = {0}, canonical first basis vectors.
    bool degenerate = false;
};

/// Keeps singular values strictly above threshold * sigma_1, at least one,
/// and at most max_rank.
TruncatedSVD svd_truncated(const Matrix& m, double threshold, std::optional<std::size_t> max_rank = std::nullopt);

double nuclear_norm(const Matrix& m);

/// Number of singular values above threshold * sigma_1 (0 for a zero matrix).
std::size_t numerical_rank(const Matrix& m, double threshold);

}  // namespace rgtn
