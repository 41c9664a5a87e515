#pragma once
// Batch commands behind the `rgtn` executable. Each returns the process exit
// code: 0 success, 1 usage or configuration error, 2 numerical abort.

#include <iosfwd>
#include <string>
#include <vector>

#include "rgtn/config.hpp"

namespace rgtn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Writes tensor.rgt, truth.json and (when entries are missing) mask.rgt.
int synth(const RunConfig& cfg, std::ostream& log);
/// Structure search on input.tensor; writes best.json, signature.txt,
/// report.json and appends a row to results.csv.
int search(const RunConfig& cfg, std::ostream& log);
/// Completion of input.tensor under input.mask; writes completed.rgt,
/// best.json, report.json and a results row.
int complete(const RunConfig& cfg, std::ostream& log);
/// Success-rate experiment; writes success.csv and trials.csv.
int reveal(const RunConfig& cfg, std::ostream& log);
/// Each method at each RE bound on input.tensor; one results row apiece.
int compare(const RunConfig& cfg, std::ostream& log);

std::vector<std::string> command_names();
/// Runs a named command, mapping exceptions to exit codes and messages on err.
int run(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace rgtn::cli
