#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mrfem/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Residual-minimisation FEM for the Poisson problem on (-1,1)x(0,1)"};
  std::string mode = "adaptive";
  mrfem::RunConfig config;
  int max_dofs = 0, levels = 0;
  bool no_timing = false;

  app.add_option("--mode", mode, "uniform, adaptive or diagnostics")
      ->check(CLI::IsMember({"uniform", "adaptive", "diagnostics"}));
  app.add_option("--p", config.p, "polynomial degree (>= 1)")->required();
  app.add_option("--theta", config.theta, "Doerfler parameter in (0, 1]")->capture_default_str();
  auto* dofs_opt = app.add_option("--max-dofs", max_dofs, "adaptive: stop before a level with more trial dofs");
  auto* levels_opt = app.add_option("--levels", levels, "uniform/diagnostics: number of refinements");
  app.add_option("--problem", config.problem, "singular or poly:k")->capture_default_str();
  app.add_option("--out-csv", config.out_csv, "CSV output path")->required();
  app.add_option("--out-svg", config.out_svg, "optional SVG plot path");
  app.add_flag("--no-timing", no_timing, "leave wall_time_s empty so repeated runs are byte-identical");

  try {
    app.parse(argc, argv);
    config.mode = mrfem::parse_mode(mode);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mrfem::kExitOk : mrfem::kExitConfig;
  }
  if (*dofs_opt) config.max_dofs = max_dofs;
  if (*levels_opt) config.levels = levels;
  config.timing = !no_timing;

  const int status = mrfem::run(config, std::cerr);
  if (status == mrfem::kExitConfig) std::cerr << app.help();
  return status;
}
