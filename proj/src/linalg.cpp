#include "rgtn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgtn/kernels.hpp"

namespace rgtn {
namespace {

constexpr int kMaxSweeps = 80;
constexpr double kJacobiTol = 1e-15;

// Orthogonalizes the k rows of `w` (each of length len) in place and applies
// the same rotations to the rows of `v` (k x k, starts as identity).
void jacobi_rows(std::vector<double>& w, std::size_t k, std::size_t len, std::vector<double>& v) {
    std::vector<double> norms(k);
    for (std::size_t i = 0; i < k; ++i) norms[i] = kernels::sumsq(&w[i * len], len);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const double alpha = norms[i];
                const double beta = norms[j];
                const double gamma = kernels::dot(&w[i * len], &w[j * len], len);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                kernels::rotate(&w[i * len], &w[j * len], len, c, s);
                kernels::rotate(&v[i * k], &v[j * k], k, c, s);
                norms[i] = kernels::sumsq(&w[i * len], len);
                norms[j] = kernels::sumsq(&w[j * len], len);
            }
        }
        if (!rotated) break;
    }
}

}  // namespace

ThinSVD svd_thin(const Matrix& m) {
    const bool wide = m.rows < m.cols;
    // Rows of `w` are the vectors to orthogonalize: columns of m (tall case)
    // or rows of m (wide case).
    const std::size_t k = wide ? m.rows : m.cols;
    const std::size_t len = wide ? m.cols : m.rows;
    std::vector<double> w;
    if (wide) {
        w = m.data;
    } else {
        w.resize(k * len);
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t j = 0; j < m.cols; ++j) w[j * len + i] = m(i, j);
    }
    std::vector<double> v(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;
    jacobi_rows(w, k, len, v);

    std::vector<double> sig(k);
    for (std::size_t i = 0; i < k; ++i) sig[i] = std::sqrt(kernels::sumsq(&w[i * len], len));
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sig[a] > sig[b]; });

    // Rows of v are the rotated basis: row i of v holds the coefficients of
    // output vector i, i.e. v^T is the right factor for the rotated side.
    ThinSVD out;
    out.s.resize(k);
    Matrix left(len, k);   // normalized rotated vectors as columns
    Matrix other(k, k);    // row r = rotation coefficients of vector r
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t src = order[r];
        out.s[r] = sig[src];
        if (sig[src] > 0.0) {
            const double inv = 1.0 / sig[src];
            for (std::size_t i = 0; i < len; ++i) left(i, r) = w[src * len + i] * inv;
        }
        for (std::size_t i = 0; i < k; ++i) other(r, i) = v[src * k + i];
    }
    if (wide) {
        // m^T = left * diag(s) * other  =>  m = other^T * diag(s) * left^T
        out.u = transpose(other);
        out.vt = transpose(left);
    } else {
        out.u = std::move(left);
        out.vt = std::move(other);
    }
    return out;
}

std::vector<double> singular_values(const Matrix& m) { return svd_thin(m).s; }

TruncatedSVD svd_truncated(const Matrix& m, double threshold, std::optional<std::size_t> max_rank) {
    if (threshold < 0.0) throw std::invalid_argument("svd_truncated: threshold must be non-negative");
    if (m.rows == 0 || m.cols == 0) throw ShapeError("svd_truncated: empty matrix");
    ThinSVD full = svd_thin(m);
    TruncatedSVD out;
    if (full.s.empty() || full.s[0] == 0.0) {
        out.degenerate = true;
        out.rank = 1;
        out.singular = {0.0};
        out.left = Matrix(m.rows, 1);
        out.left(0, 0) = 1.0;
        out.right = Matrix(1, m.cols);
        out.right(0, 0) = 1.0;
        return out;
    }
    const double cut = threshold * full.s[0];
    std::size_t r = 0;
    while (r < full.s.size() && full.s[r] > cut && full.s[r] > 0.0) ++r;
    r = std::max<std::size_t>(r, 1);
    if (max_rank) r = std::max<std::size_t>(1, std::min(r, *max_rank));
    out.rank = r;
    out.singular.assign(full.s.begin(), full.s.begin() + static_cast<std::ptrdiff_t>(r));
    out.left = Matrix(m.rows, r);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < r; ++j) out.left(i, j) = full.u(i, j);
    out.right = Matrix(r, m.cols);
    std::copy_n(full.vt.data.begin(), r * m.cols, out.right.data.begin());
    return out;
}

double nuclear_norm(const Matrix& m) {
    const auto s = singular_values(m);
    return std::accumulate(s.begin(), s.end(), 0.0);
}

std::size_t numerical_rank(const Matrix& m, double threshold) {
    const auto s = singular_values(m);
    if (s.empty() || s[0] == 0.0) return 0;
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double x) { return x > threshold * s[0]; }));
}

}  // namespace rgtn
