#include "mrfem/adaptivity.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "mrfem/diagnostics.hpp"

namespace mrfem {

namespace {

constexpr double kEstimatorFloor = 1e-10;

using Clock = std::chrono::steady_clock;

RunRecord solve_on(const ProblemData& problem, const SpaceTriple& spaces, int level, const RunOptions& options,
                   Indicators* indicators_out) {
  const auto start = Clock::now();
  RunRecord rec;
  rec.level = level;
  rec.ndof_x = spaces.trial.ndofs();
  try {
    const BlockSystem system = assemble_block_system(spaces, problem);
    const SolveResult result = solve(system);
    Indicators ind = local_indicators(result, spaces);
    rec.estimator = ind.global;
    if (options.compute_true_error && problem.exact) {
      rec.true_error = true_error(result, *problem.exact, spaces);
      if (*rec.true_error > 0.0) rec.effectivity = rec.estimator / *rec.true_error;
    }
    if (options.compute_beta) rec.beta = practical_infsup(spaces.mesh, spaces.p);
    rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    if (options.observer) options.observer(LevelState{rec, spaces, result, ind});
    if (indicators_out) *indicators_out = std::move(ind);
  } catch (const LevelError&) {
    throw;
  } catch (const SolverError& e) {
    throw LevelError(level, e.what());
  }
  return rec;
}

}  // namespace

LevelError::LevelError(int level, const std::string& what)
    : SolverError("level " + std::to_string(level) + ": " + what), level_(level) {}

RunRecord solve_level(const ProblemData& problem, std::shared_ptr<const Mesh> mesh, int p, int level,
                      const RunOptions& options, Indicators* indicators_out) {
  return solve_on(problem, build_space_triple(std::move(mesh), p), level, options, indicators_out);
}

std::vector<RunRecord> run_adaptive(const ProblemData& problem, int p, double theta, int max_dofs,
                                    const RunOptions& options) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("run_adaptive: theta must lie in (0, 1]");
  if (max_dofs < 1) throw Error("run_adaptive: max_dofs must be positive");
  std::vector<RunRecord> out;
  auto mesh = std::make_shared<const Mesh>(initial_mesh());
  for (int level = 0;; ++level) {
    const SpaceTriple spaces = build_space_triple(mesh, p);
    if (level > 0 && spaces.trial.ndofs() > max_dofs) break;
    Indicators ind;
    out.push_back(solve_on(problem, spaces, level, options, &ind));
    if (ind.global <= kEstimatorFloor) break;
    const std::vector<int> marked = dorfler_mark(ind, theta);
    if (marked.empty()) break;
    mesh = std::make_shared<const Mesh>(bisect(*mesh, marked));
  }
  return out;
}

std::vector<RunRecord> run_uniform(const ProblemData& problem, int p, int levels, const RunOptions& options) {
  if (levels < 0) throw Error("run_uniform: levels must be >= 0");
  std::vector<RunRecord> out;
  auto mesh = std::make_shared<const Mesh>(initial_mesh());
  for (int level = 0; level <= levels; ++level) {
    if (level > 0) mesh = std::make_shared<const Mesh>(refine_uniform(*mesh));
    out.push_back(solve_level(problem, mesh, p, level, options));
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("loglog_slope: size mismatch");
  if (x.size() < 2) throw Error("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error("loglog_slope: x values are all equal");
  return sxy / sxx;
}

double trailing_slope(std::span<const RunRecord> records, int window, bool use_true_error) {
  if (window < 2 || static_cast<std::size_t>(window) > records.size()) {
    throw Error("trailing_slope: window must lie in [2, number of records]");
  }
  std::vector<double> x, y;
  for (std::size_t i = records.size() - window; i < records.size(); ++i) {
    x.push_back(records[i].ndof_x);
    if (use_true_error) {
      if (!records[i].true_error) throw Error("trailing_slope: record without true error");
      y.push_back(*records[i].true_error);
    } else {
      y.push_back(records[i].estimator);
    }
  }
  return loglog_slope(x, y);
}

}  // namespace mrfem
