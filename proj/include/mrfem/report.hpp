#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrfem/adaptivity.hpp"

namespace mrfem {

enum class RunMode { Uniform, Adaptive, Diagnostics };

RunMode parse_mode(const std::string& name);
const char* to_string(RunMode mode);

/// "singular" or "poly:k" with k >= 1.
ProblemData parse_problem(const std::string& name);

struct RunConfig {
  RunMode mode = RunMode::Adaptive;
  int p = 1;
  double theta = 0.6;
  std::optional<int> max_dofs;  // adaptive
  std::optional<int> levels;    // uniform, diagnostics
  std::string problem = "singular";
  std::string out_csv;
  std::string out_svg;
  bool timing = true;  // when false the wall_time_s column is left empty
};

/// Throws Error when the mode and its limits do not fit together.
void validate(const RunConfig& config);

/// Runs the configured loop and returns its records.
std::vector<RunRecord> execute(const RunConfig& config);

inline constexpr const char* kCsvHeader = "level,ndof_x,estimator,true_error,effectivity,beta,wall_time_s";

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

void write_csv(std::ostream& os, std::span<const RunRecord> records, bool timing = true);

/// 640x480 log-log plot of estimator and true error against ndof_x with
/// guide lines of slope -1/4 and -p/2.
void write_svg(std::ostream& os, std::span<const RunRecord> records, int p, const std::string& title);

/// Exit status: 0 success, 2 configuration error, 3 solver error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Validates, executes and writes outputs; errors are reported on `err`.
int run(const RunConfig& config, std::ostream& err);

}  // namespace mrfem
