#include "rgtn/trals.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace rgtn {

void RingSpec::validate(std::size_t order) const {
    if (order < 3) throw std::invalid_argument("RingSpec: tensor rings need order >= 3");
    if (ranks.size() != order) throw std::invalid_argument("RingSpec: need one rank per mode");
    for (auto r : ranks)
        if (r < 1) throw std::invalid_argument("RingSpec: ranks must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("RingSpec: max_iters must be >= 1");
    if (!(tol >= 0.0) || !(ridge >= 0.0)) throw std::invalid_argument("RingSpec: tol and ridge must be >= 0");
}

RingSpec RingSpec::uniform(std::size_t order, std::size_t rank) {
    RingSpec s;
    s.ranks.assign(order, rank);
    return s;
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Core k stored as (R_{k-1}, I_k, R_k), row-major.
struct RingCore {
    std::size_t left = 0, dim = 0, right = 0;
    std::vector<double> v;
};

class RingAls {
public:
    RingAls(const DenseTensor& data, const std::optional<DenseTensor>& mask, const RingSpec& spec)
        : spec_(spec), n_(data.order()), shape_(data.shape()) {
        for (std::size_t k = 0; k < n_; ++k) {
            std::vector<std::size_t> perm(n_);
            for (std::size_t m = 0; m < n_; ++m) perm[m] = (k + m) % n_;
            const std::size_t cols = data.size() / shape_[k];
            x_.push_back(permute(data, perm).as_matrix(shape_[k], cols));
            if (mask) {
                const Matrix mk = permute(*mask, perm).as_matrix(shape_[k], cols);
                std::vector<std::vector<std::size_t>> rows(shape_[k]);
                for (std::size_t i = 0; i < mk.rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j)
                        if (mk(i, j) != 0.0) rows[i].push_back(j);
                observed_.push_back(std::move(rows));
            }
        }
    }

    void init(std::uint64_t seed) {
        if (spec_.init == RingInit::Svd)
            init_svd(seed);
        else
            init_random(seed);
    }

    void init_random(std::uint64_t seed) {
        double sum = 0.0, count = 0.0;
        const Matrix& x = x_[0];
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j)
                if (is_observed(0, i, j)) {
                    sum += x(i, j) * x(i, j);
                    count += 1.0;
                }
        const double rms = count > 0.0 && sum > 0.0 ? std::sqrt(sum / count) : 1.0;
        double bonds = 1.0;
        for (auto r : spec_.ranks) bonds *= static_cast<double>(r);
        const double sigma = std::pow(rms * rms / bonds, 0.5 / static_cast<double>(n_));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, sigma);
        cores_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            auto& c = cores_[k];
            c.left = spec_.ranks[(k + n_ - 1) % n_];
            c.dim = shape_[k];
            c.right = spec_.ranks[k];
            c.v.resize(c.left * c.dim * c.right);
            for (auto& e : c.v) e = normal(rng);
        }
    }

    // Updates core k in place; returns the design matrix Z (J x P).
    RowMat update(std::size_t k) {
        const RowMat z = design(k);
        auto& c = cores_[k];
        const std::size_t p = c.left * c.right;
        const Matrix& x = x_[k];
        const Eigen::Map<const RowMat> xm(x.data.data(), x.rows, x.cols);
        RowMat g(c.dim, p);
        if (observed_.empty()) {
            Eigen::MatrixXd a = z.transpose() * z;
            regularize(a);
            const Eigen::MatrixXd rhs = z.transpose() * xm.transpose();
            g = a.ldlt().solve(rhs).transpose();
        } else {
            for (std::size_t i = 0; i < c.dim; ++i) {
                const auto& cols = observed_[k][i];
                Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
                Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
                for (std::size_t j : cols) {
                    a.selfadjointView<Eigen::Lower>().rankUpdate(z.row(j).transpose());
                    b += xm(i, j) * z.row(j).transpose();
                }
                a = a.selfadjointView<Eigen::Lower>();
                regularize(a);
                g.row(i) = a.ldlt().solve(b).transpose();
            }
        }
        // g(i, a * right + b) -> core (a, i, b)
        for (std::size_t a = 0; a < c.left; ++a)
            for (std::size_t i = 0; i < c.dim; ++i)
                for (std::size_t b = 0; b < c.right; ++b)
                    c.v[(a * c.dim + i) * c.right + b] = g(i, a * c.right + b);
        return z;
    }

    // Relative error over observed entries, given the design matrix of core k.
    double relative_error(std::size_t k, const RowMat& z) const {
        const auto& c = cores_[k];
        RowMat g(c.dim, c.left * c.right);
        for (std::size_t a = 0; a < c.left; ++a)
            for (std::size_t i = 0; i < c.dim; ++i)
                for (std::size_t b = 0; b < c.right; ++b)
                    g(i, a * c.right + b) = c.v[(a * c.dim + i) * c.right + b];
        const RowMat est = g * z.transpose();
        const Matrix& x = x_[k];
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j)
                if (is_observed(k, i, j)) {
                    const double d = x(i, j) - est(i, j);
                    num += d * d;
                    den += x(i, j) * x(i, j);
                }
        return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }

    // Sequential truncated SVDs: the first split yields R_{N-1} R_0 columns,
    // each later one R_k, and the remainder becomes the last core.
    void init_svd(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        const Matrix& x = x_[0];
        double observed = 0.0;
        RowMat m(x.rows, x.cols);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j) {
                const bool o = is_observed(0, i, j);
                m(i, j) = o ? x(i, j) : 0.0;
                observed += o ? 1.0 : 0.0;
            }
        if (observed > 0.0) m *= static_cast<double>(m.size()) / observed;
        const auto& r = spec_.ranks;
        cores_.resize(n_);

        // Returns U (rows x rank) and diag(s) V^T (rank x cols), padding
        // missing directions with small random vectors.
        auto split = [&](const RowMat& a, std::size_t rank) {
            Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            const double pad = 1e-3 * (sv.size() > 0 && sv(0) > 0.0 ? sv(0) : 1.0);
            RowMat u(a.rows(), rank), w(rank, a.cols());
            for (std::size_t t = 0; t < rank; ++t) {
                if (t < static_cast<std::size_t>(sv.size()) && sv(t) > 1e-12 * sv(0)) {
                    u.col(t) = svd.matrixU().col(t);
                    w.row(t) = sv(t) * svd.matrixV().col(t).transpose();
                } else {
                    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, t) = normal(rng) / std::sqrt(double(u.rows()));
                    for (Eigen::Index j = 0; j < w.cols(); ++j) w(t, j) = pad * normal(rng) / std::sqrt(double(w.cols()));
                }
            }
            return std::make_pair(u, w);
        };

        const std::size_t rl = r[n_ - 1], r0 = r[0];
        auto [u0, w0] = split(m, rl * r0);
        auto& c0 = cores_[0];
        c0 = {rl, shape_[0], r0, std::vector<double>(rl * shape_[0] * r0)};
        for (std::size_t a = 0; a < rl; ++a)
            for (std::size_t i = 0; i < shape_[0]; ++i)
                for (std::size_t b = 0; b < r0; ++b) c0.v[(a * shape_[0] + i) * r0 + b] = u0(i, a * r0 + b);
        // Remainder as (R_0, J, R_{N-1}).
        std::size_t rest = x.cols;
        std::vector<double> rem(r0 * rest * rl);
        for (std::size_t a = 0; a < rl; ++a)
            for (std::size_t b = 0; b < r0; ++b)
                for (std::size_t j = 0; j < rest; ++j) rem[(b * rest + j) * rl + a] = w0(a * r0 + b, j);
        std::size_t left = r0;
        for (std::size_t k = 1; k + 1 < n_; ++k) {
            rest /= shape_[k];
            const Eigen::Map<const RowMat> a(rem.data(), left * shape_[k], rest * rl);
            auto [u, w] = split(a, r[k]);
            cores_[k] = {left, shape_[k], r[k], std::vector<double>(u.data(), u.data() + u.size())};
            rem.assign(w.data(), w.data() + w.size());
            left = r[k];
        }
        cores_[n_ - 1] = {left, shape_[n_ - 1], rl, rem};
    }

    bool finite() const {
        for (const auto& c : cores_)
            for (double v : c.v)
                if (!std::isfinite(v)) return false;
        return true;
    }

    TNGraph to_graph() const {
        std::vector<EdgeSpec> edges;
        for (std::size_t k = 0; k + 1 < n_; ++k)
            edges.push_back({int(k), int(k + 1), spec_.ranks[k], kTransparentGateWeight});
        edges.push_back({0, int(n_ - 1), spec_.ranks[n_ - 1], kTransparentGateWeight});
        TNGraph g = TNGraph::one_per_mode(shape_, edges);
        for (std::size_t k = 0; k < n_; ++k) {
            const auto& c = cores_[k];
            const DenseTensor t({c.left, c.dim, c.right}, c.v);
            // Node 0 lists its bonds as (edge 0 = right, edge N-1 = left);
            // every other node as (left, right).
            const std::vector<std::size_t> perm = k == 0 ? std::vector<std::size_t>{2, 0, 1}
                                                         : std::vector<std::size_t>{0, 2, 1};
            g.core(int(k)).tensor = permute(t, perm);
        }
        g.validate();
        return g;
    }

private:
    bool is_observed(std::size_t k, std::size_t i, std::size_t j) const {
        if (observed_.empty()) return true;
        const auto& cols = observed_[k][i];
        return std::binary_search(cols.begin(), cols.end(), j);
    }

    void regularize(Eigen::MatrixXd& a) const {
        a.diagonal().array() += spec_.ridge;
    }

    // Z(j, a * R_k + b) = S(b, j, a) where S is the product of cores
    // k+1, ..., k-1 around the ring, j running over their modes in that
    // cyclic order with the last varying fastest.
    RowMat design(std::size_t k) const {
        const auto& first = cores_[(k + 1) % n_];
        RowMat t = Eigen::Map<const RowMat>(first.v.data(), first.left * first.dim, first.right);
        std::size_t j = first.dim;
        for (std::size_t m = 2; m < n_; ++m) {
            const auto& c = cores_[(k + m) % n_];
            const Eigen::Map<const RowMat> gm(c.v.data(), c.left, c.dim * c.right);
            RowMat next = t * gm;
            j *= c.dim;
            t = Eigen::Map<RowMat>(next.data(), first.left * j, c.right);
        }
        const std::size_t rk = first.left, rl = cores_[k].left;
        RowMat z(j, rl * rk);
        for (std::size_t b = 0; b < rk; ++b)
            for (std::size_t jj = 0; jj < j; ++jj)
                for (std::size_t a = 0; a < rl; ++a) z(jj, a * rk + b) = t(b * j + jj, a);
        return z;
    }

    const RingSpec& spec_;
    std::size_t n_;
    Shape shape_;
    std::vector<Matrix> x_;
    std::vector<std::vector<std::vector<std::size_t>>> observed_;
    std::vector<RingCore> cores_;
};

}  // namespace

TrAlsResult tr_als(const DenseTensor& data, const std::optional<DenseTensor>& mask, const RingSpec& spec,
                   std::uint64_t seed) {
    spec.validate(data.order());
    if (mask && mask->shape() != data.shape()) throw ShapeError("tr_als: mask shape does not match data shape");
    const auto start = std::chrono::steady_clock::now();
    RingAls als(data, mask, spec);
    als.init(seed);
    TrAlsResult res;
    const std::size_t n = data.order();
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 0; sweep < spec.max_iters; ++sweep) {
        RowMat z;
        for (std::size_t k = 0; k < n; ++k) z = als.update(k);
        const double re = als.relative_error(n - 1, z);
        if (!als.finite() || !std::isfinite(re)) {
            res.aborted = true;
            res.diagnostic = "tr_als: non-finite values in sweep " + std::to_string(sweep + 1);
            break;
        }
        res.trace.push_back(re);
        res.sweeps = sweep + 1;
        if (prev - re < spec.tol) {
            res.converged = true;
            break;
        }
        prev = re;
    }
    res.ring = als.to_graph();
    res.eval.re = res.trace.empty() ? std::numeric_limits<double>::infinity() : res.trace.back();
    res.eval.cr_percent = 100.0 * static_cast<double>(param_count(res.ring)) / static_cast<double>(data.size());
    res.eval.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

RankScheduleResult tr_als_rank_schedule(const DenseTensor& data, const std::optional<DenseTensor>& mask,
                                        double re_bound, std::size_t max_rank, const RingSpec& base,
                                        std::uint64_t seed) {
    if (max_rank < 1) throw std::invalid_argument("tr_als_rank_schedule: max_rank must be >= 1");
    RankScheduleResult out;
    for (std::size_t r = 1; r <= max_rank; ++r) {
        RingSpec spec = base;
        spec.ranks.assign(data.order(), r);
        out.fit = tr_als(data, mask, spec, seed);
        out.rank = r;
        out.tried.push_back({r, out.fit.eval.re});
        if (out.fit.eval.re <= re_bound) {
            out.met = true;
            break;
        }
    }
    return out;
}

}  // namespace rgtn
