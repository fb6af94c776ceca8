#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mrfem/estimator.hpp"
#include "mrfem/problems.hpp"

namespace mrfem {

struct RunRecord {
  int level = 0;
  int ndof_x = 0;
  double estimator = 0.0;
  std::optional<double> true_error;
  std::optional<double> effectivity;
  std::optional<double> beta;
  double wall_time = 0.0;  // seconds spent on this level
};

/// Everything known about one solved level; handed to RunOptions::observer.
struct LevelState {
  const RunRecord& record;
  const SpaceTriple& spaces;
  const SolveResult& result;
  const Indicators& indicators;
};

struct RunOptions {
  bool compute_true_error = true;
  /// Also compute the practical inf-sup constant on each level (dense, small meshes only).
  bool compute_beta = false;
  std::function<void(const LevelState&)> observer;
};

/// Raised when a level fails; the message carries the level number.
class LevelError : public SolverError {
 public:
  LevelError(int level, const std::string& what);
  int level() const { return level_; }

 private:
  int level_;
};

/// solve -> estimate -> mark -> bisect, starting on initial_mesh(). Stops
/// before solving a level whose trial space exceeds max_dofs (level 0 is
/// always solved), when the estimator drops to 1e-10, or when marking is empty.
std::vector<RunRecord> run_adaptive(const ProblemData& problem, int p, double theta, int max_dofs,
                                    const RunOptions& options = {});

/// Levels 0..levels of uniform refinement starting on initial_mesh().
std::vector<RunRecord> run_uniform(const ProblemData& problem, int p, int levels, const RunOptions& options = {});

/// Solves and records one level on a given mesh.
RunRecord solve_level(const ProblemData& problem, std::shared_ptr<const Mesh> mesh, int p, int level,
                      const RunOptions& options, Indicators* indicators_out = nullptr);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Slope of the estimator (or the true error) over the trailing `window` records.
double trailing_slope(std::span<const RunRecord> records, int window, bool use_true_error = false);

}  // namespace mrfem
