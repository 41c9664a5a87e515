#pragma once
// Tensor-ring alternating least squares on a fixed ring topology, used as
// the fixed-structure baseline.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rgtn/metrics.hpp"
#include "rgtn/tensor.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

enum class RingInit {
    /// Sequential truncated SVDs of the (zero-filled) data; slots beyond the
    /// numerical rank are filled with small random values.
    Svd,
    Random,
};

struct RingSpec {
    /// ranks[k] is the bond between cores k and (k + 1) mod N.
    std::vector<std::size_t> ranks;
    std::size_t max_iters = 100;
    /// Stop once a sweep improves the relative error by less than this.
    double tol = 1e-8;
    /// Tikhonov weight added to the diagonal of every normal matrix.
    double ridge = 1e-8;
    RingInit init = RingInit::Svd;

    /// Throws std::invalid_argument unless ranks has one entry >= 1 per mode
    /// of an order >= 3 tensor.
    void validate(std::size_t order) const;
    static RingSpec uniform(std::size_t order, std::size_t rank);
};

struct TrAlsResult {
    /// Ring with edge k = (k, k+1) for k < N-1 and edge N-1 = (0, N-1),
    /// transparent gates and unit diagonals.
    TNGraph ring;
    /// re is over observed entries (all entries without a mask).
    EvalReport eval;
    /// Relative error after each sweep.
    std::vector<double> trace;
    std::size_t sweeps = 0;
    bool converged = false;
    bool aborted = false;
    std::string diagnostic;
};

TrAlsResult tr_als(const DenseTensor& data, const std::optional<DenseTensor>& mask, const RingSpec& spec,
                   std::uint64_t seed);

struct RankScheduleResult {
    TrAlsResult fit;
    std::size_t rank = 0;
    bool met = false;
    /// (uniform rank, relative error) of every fit tried.
    std::vector<std::pair<std::size_t, double>> tried;
};

/// Fits uniform ranks 1, 2, ..., max_rank and stops at the first fit whose
/// relative error is <= re_bound; otherwise returns the max_rank fit with
/// met = false. Iteration settings come from `base`; its ranks are ignored.
RankScheduleResult tr_als_rank_schedule(const DenseTensor& data, const std::optional<DenseTensor>& mask,
                                        double re_bound, std::size_t max_rank, const RingSpec& base,
                                        std::uint64_t seed);

}  // namespace rgtn
