#include "rgtn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rgtn {

double relative_error(const DenseTensor& truth, const DenseTensor& est) {
    if (truth.shape() != est.shape()) throw ShapeError("relative_error: shape mismatch");
    const double n = frobenius_norm(truth);
    if (!(n > 0.0)) throw std::invalid_argument("relative_error: zero reference tensor");
    return frobenius_norm(truth - est) / n;
}

namespace {

double mse(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(n);
}

double psnr_from_mse(double m, double peak) { return m == 0.0 ? kInfinitePsnr : 10.0 * std::log10(peak * peak / m); }

}  // namespace

double psnr(const DenseTensor& truth, const DenseTensor& est, double peak) {
    if (truth.shape() != est.shape()) throw ShapeError("psnr: shape mismatch");
    return psnr_from_mse(mse(truth.data().data(), est.data().data(), truth.size()), peak);
}

MpsnrResult mpsnr(const DenseTensor& truth, const DenseTensor& est, std::size_t temporal_mode, double peak) {
    if (truth.shape() != est.shape()) throw ShapeError("mpsnr: shape mismatch");
    if (temporal_mode >= truth.order()) throw ShapeError("mpsnr: temporal mode out of range");
    // Frames are rows of the mode unfolding.
    const Matrix a = unfold(truth, temporal_mode), b = unfold(est, temporal_mode);
    MpsnrResult r;
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t t = 0; t < a.rows; ++t) {
        const double p = psnr_from_mse(mse(a.row(t), b.row(t), a.cols), peak);
        r.per_frame.push_back(p);
        if (std::isinf(p)) {
            ++r.infinite_frames;
        } else {
            sum += p;
            ++finite;
        }
    }
    r.mean_db = finite ? sum / static_cast<double>(finite) : kInfinitePsnr;
    return r;
}

std::pair<DenseTensor, DenseTensor> rescale_to_peak(const DenseTensor& truth, const DenseTensor& est, double peak) {
    if (truth.shape() != est.shape()) throw ShapeError("rescale_to_peak: shape mismatch");
    const auto [lo, hi] = std::minmax_element(truth.values().begin(), truth.values().end());
    const double a = *lo, span = *hi - *lo;
    const double k = span > 0.0 ? peak / span : 1.0;
    DenseTensor t = truth, e = est;
    for (auto& v : t.values()) v = (v - a) * k;
    for (auto& v : e.values()) v = (v - a) * k;
    return {std::move(t), std::move(e)};
}

std::string format_row(const ResultRow& row) {
    for (const auto* s : {&row.method, &row.dataset})
        if (s->find_first_of(",\n") != std::string::npos)
            throw std::invalid_argument("results row: field contains a delimiter");
    std::ostringstream os;
    os << std::setprecision(10) << row.method << ',' << row.dataset << ',' << row.re_bound << ',' << row.cr << ','
       << row.re << ',';
    if (row.mpsnr) os << *row.mpsnr;
    os << ',' << row.seconds;
    return os.str();
}

void append_result(const std::filesystem::path& path, const ResultRow& row) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("cannot open results file " + path.string());
    if (fresh) os << kResultsHeader << '\n';
    os << format_row(row) << '\n';
    if (!os) throw std::runtime_error("failed writing results file " + path.string());
}

}  // namespace rgtn
