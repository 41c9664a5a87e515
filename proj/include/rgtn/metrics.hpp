#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rgtn/tensor.hpp"

namespace rgtn {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double relative_error(const DenseTensor& truth, const DenseTensor& est);

/// 10 log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const DenseTensor& truth, const DenseTensor& est, double peak = 255.0);

struct MpsnrResult {
    double mean_db = kInfinitePsnr;  // infinite when every frame is exact
    std::vector<double> per_frame;
    std::size_t infinite_frames = 0;
};

/// Mean of per-frame PSNR over slices of `temporal_mode`, excluding exact
/// (infinite) frames.
MpsnrResult mpsnr(const DenseTensor& truth, const DenseTensor& est, std::size_t temporal_mode, double peak = 255.0);

/// Affine map sending truth's range onto [0, peak], applied to both tensors.
std::pair<DenseTensor, DenseTensor> rescale_to_peak(const DenseTensor& truth, const DenseTensor& est,
                                                    double peak = 255.0);

struct EvalReport {
    double re = 0.0;
    double cr_percent = 0.0;
    std::optional<double> mpsnr_db;
    std::vector<double> per_frame_psnr;
    double wall_seconds = 0.0;
};

/// One results-file row.
struct ResultRow {
    std::string method;
    std::string dataset;
    double re_bound = 0.0;
    double cr = 0.0;
    double re = 0.0;
    std::optional<double> mpsnr;
    double seconds = 0.0;
};

inline constexpr const char* kResultsHeader = "method,dataset,re_bound,cr,re,mpsnr,seconds";

std::string format_row(const ResultRow& row);
/// Appends a row, writing the header first when the file is new or empty.
void append_result(const std::filesystem::path& path, const ResultRow& row);

}  // namespace rgtn
