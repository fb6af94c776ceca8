#include "mrfem/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mrfem {

RunMode parse_mode(const std::string& name) {
  if (name == "uniform") return RunMode::Uniform;
  if (name == "adaptive") return RunMode::Adaptive;
  if (name == "diagnostics") return RunMode::Diagnostics;
  throw Error("unknown mode '" + name + "' (expected uniform, adaptive or diagnostics)");
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Uniform: return "uniform";
    case RunMode::Adaptive: return "adaptive";
    case RunMode::Diagnostics: return "diagnostics";
  }
  return "?";
}

ProblemData parse_problem(const std::string& name) {
  if (name == "singular") return singular_problem();
  if (name.rfind("poly:", 0) == 0) {
    const std::string digits = name.substr(5);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() && k >= 1) {
      return polynomial_problem(k);
    }
  }
  throw Error("unknown problem '" + name + "' (expected singular or poly:k with k >= 1)");
}

void validate(const RunConfig& c) {
  if (c.p < 1) throw Error("p must be >= 1");
  if (!(c.theta > 0.0 && c.theta <= 1.0)) throw Error("theta must lie in (0, 1]");
  switch (c.mode) {
    case RunMode::Adaptive:
      if (!c.max_dofs) throw Error("adaptive mode needs --max-dofs");
      if (c.levels) throw Error("adaptive mode takes --max-dofs, not --levels");
      if (*c.max_dofs < 1) throw Error("max-dofs must be positive");
      break;
    case RunMode::Uniform:
    case RunMode::Diagnostics:
      if (!c.levels) throw Error(std::string(to_string(c.mode)) + " mode needs --levels");
      if (c.max_dofs) throw Error(std::string(to_string(c.mode)) + " mode takes --levels, not --max-dofs");
      if (*c.levels < 0) throw Error("levels must be >= 0");
      break;
  }
  if (c.out_csv.empty()) throw Error("an output CSV path is required");
  parse_problem(c.problem);
}

std::vector<RunRecord> execute(const RunConfig& c) {
  validate(c);
  const ProblemData problem = parse_problem(c.problem);
  RunOptions options;
  switch (c.mode) {
    case RunMode::Adaptive: return run_adaptive(problem, c.p, c.theta, *c.max_dofs, options);
    case RunMode::Uniform: return run_uniform(problem, c.p, *c.levels, options);
    case RunMode::Diagnostics:
      options.compute_beta = true;
      return run_uniform(problem, c.p, *c.levels, options);
  }
  return {};
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

void put_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << format_double(*v);
}

}  // namespace

void write_csv(std::ostream& os, std::span<const RunRecord> records, bool timing) {
  os << kCsvHeader << '\n';
  for (const RunRecord& r : records) {
    os << r.level << ',' << r.ndof_x << ',' << format_double(r.estimator) << ',';
    put_optional(os, r.true_error);
    os << ',';
    put_optional(os, r.effectivity);
    os << ',';
    put_optional(os, r.beta);
    os << ',';
    if (timing) os << format_double(r.wall_time);
    os << '\n';
  }
}

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 80.0, kRight = 150.0, kTop = 40.0, kBottom = 60.0;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axes {
  double x0, x1, y0, y1;  // log10 bounds
  double px(double x) const { return kLeft + (std::log10(x) - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kTop + (y1 - std::log10(y)) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

void write_svg(std::ostream& os, std::span<const RunRecord> records, int p, const std::string& title) {
  std::vector<double> xs, ys;
  for (const RunRecord& r : records) {
    if (r.ndof_x > 0) xs.push_back(r.ndof_x);
    if (r.estimator > 0.0) ys.push_back(r.estimator);
    if (r.true_error && *r.true_error > 0.0) ys.push_back(*r.true_error);
  }
  Axes ax{0.0, 1.0, -1.0, 0.0};
  if (!xs.empty()) {
    ax.x0 = std::floor(std::log10(*std::min_element(xs.begin(), xs.end())));
    ax.x1 = std::ceil(std::log10(*std::max_element(xs.begin(), xs.end())));
    if (ax.x1 <= ax.x0) ax.x1 = ax.x0 + 1.0;
  }
  if (!ys.empty()) {
    ax.y0 = std::floor(std::log10(*std::min_element(ys.begin(), ys.end())));
    ax.y1 = std::ceil(std::log10(*std::max_element(ys.begin(), ys.end())));
    if (ax.y1 <= ax.y0) ax.y1 = ax.y0 + 1.0;
  }
  const double plot_right = kWidth - kRight, plot_bottom = kHeight - kBottom;

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
     << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
     << "</text>\n"
     << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(plot_right - kLeft)
     << "\" height=\"" << fmt(plot_bottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int e = static_cast<int>(ax.x0); e <= static_cast<int>(ax.x1); ++e) {
    const double x = ax.px(std::pow(10.0, e));
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(plot_bottom)
       << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(plot_bottom + 18) << "\" text-anchor=\"middle\" font-size=\"11\">1e"
       << e << "</text>\n";
  }
  for (int e = static_cast<int>(ax.y0); e <= static_cast<int>(ax.y1); ++e) {
    const double y = ax.py(std::pow(10.0, e));
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(plot_right) << "\" y2=\"" << fmt(y)
       << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">1e" << e
       << "</text>\n";
  }
  os << "<text x=\"" << fmt((kLeft + plot_right) / 2) << "\" y=\"" << fmt(kHeight - 16)
     << "\" text-anchor=\"middle\" font-size=\"12\">ndof_x</text>\n";

  os << "<clipPath id=\"plot\"><rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
     << fmt(plot_right - kLeft) << "\" height=\"" << fmt(plot_bottom - kTop) << "\"/></clipPath>\n";

  struct Series {
    std::string name, color, dash;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  Series est{"estimator", "#1f77b4", "", {}}, err{"true error", "#d62728", "", {}};
  for (const RunRecord& r : records) {
    if (r.ndof_x > 0 && r.estimator > 0.0) est.pts.emplace_back(r.ndof_x, r.estimator);
    if (r.ndof_x > 0 && r.true_error && *r.true_error > 0.0) err.pts.emplace_back(r.ndof_x, *r.true_error);
  }
  if (!est.pts.empty()) series.push_back(est);
  if (!err.pts.empty()) series.push_back(err);

  // Guides anchored at the first estimator point.
  if (!est.pts.empty()) {
    const auto [xa, ya] = est.pts.front();
    const double xb = std::pow(10.0, ax.x1);
    for (const double slope : {-0.25, -0.5 * p}) {
      Series g;
      std::ostringstream name;
      name << "slope " << slope;
      g.name = name.str();
      g.color = "#777";
      g.dash = "6,4";
      g.pts = {{xa, ya}, {xb, ya * std::pow(xb / xa, slope)}};
      series.push_back(std::move(g));
    }
  }

  double legend_y = kTop + 10;
  for (const Series& s : series) {
    os << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.pts.size(); ++i) {
      os << (i ? " " : "") << fmt(ax.px(s.pts[i].first)) << ',' << fmt(ax.py(s.pts[i].second));
    }
    os << "\"/>\n";
    os << "<line x1=\"" << fmt(plot_right + 10) << "\" y1=\"" << fmt(legend_y) << "\" x2=\"" << fmt(plot_right + 30)
       << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << s.color << "\"";
    if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
    os << "/>\n<text x=\"" << fmt(plot_right + 34) << "\" y=\"" << fmt(legend_y + 4) << "\" font-size=\"11\">"
       << xml_escape(s.name) << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
}

int run(const RunConfig& config, std::ostream& err) {
  std::vector<RunRecord> records;
  try {
    validate(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    records = execute(config);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::ofstream csv(config.out_csv);
  if (!csv) {
    err << "error: cannot open " << config.out_csv << " for writing\n";
    return kExitConfig;
  }
  write_csv(csv, records, config.timing);
  if (!config.out_svg.empty()) {
    std::ofstream svg(config.out_svg);
    if (!svg) {
      err << "error: cannot open " << config.out_svg << " for writing\n";
      return kExitConfig;
    }
    std::ostringstream title;
    title << config.problem << ", " << to_string(config.mode) << ", p = " << config.p;
    write_svg(svg, records, config.p, title.str());
  }
  return kExitOk;
}

}  // namespace mrfem
