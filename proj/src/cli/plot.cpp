#include <cmath>
#include <set>

#include "cli/commands.hpp"
#include "cli/svg.hpp"

namespace gausseot::cli {

namespace {

struct FigureParams {
  double a = 1.0;  // variance of mu
  double b = 1.0;  // variance of nu
  std::vector<double> epsilons;
  std::vector<double> rhos;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

FigureParams defaults(int figure) {
  FigureParams p;
  switch (figure) {
    case 1: p.epsilons = {0.25, 0.5, 1, 2, 5, 10}; p.rhos = {0.0}; break;
    case 2: p.epsilons = {2.0}; p.rhos = {0, 0.3, 0.6, 0.9, 0.95, 0.99}; break;
    case 3: p.epsilons = linspace(0, 10, 101); p.rhos = {0, 0.5, 0.9}; break;
    case 4: p.epsilons = {0.5, 1, 2, 5}; p.rhos = linspace(0, 0.99, 100); break;
    default: throw ValidationError("figure", "expected 1, 2, 3 or 4, got " + std::to_string(figure));
  }
  return p;
}

FigureParams parse_params(int figure, const Json& params) {
  FigureParams p = defaults(figure);
  if (params.is_null()) return p;
  if (!params.is_object()) throw ValidationError("params", "expected an object");
  static const std::set<std::string> known{"a", "b", "epsilon", "epsilons", "rho", "rhos"};
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError(it.key(), "unknown plot parameter");
  }
  if (params.contains("a")) p.a = require_number(params["a"], "a");
  if (params.contains("b")) p.b = require_number(params["b"], "b");
  if (params.contains("epsilon")) p.epsilons = {require_number(params["epsilon"], "epsilon")};
  if (params.contains("epsilons")) p.epsilons = require_number_list(params["epsilons"], "epsilons");
  if (params.contains("rho")) p.rhos = {require_number(params["rho"], "rho")};
  if (params.contains("rhos")) p.rhos = require_number_list(params["rhos"], "rhos");
  return p;
}

void validate(int figure, const FigureParams& p) {
  if (!(p.a > 0)) throw ValidationError("a", "variance must be > 0");
  if (!(p.b > 0)) throw ValidationError("b", "variance must be > 0");
  if (p.epsilons.empty()) throw ValidationError("epsilons", "must not be empty");
  if (p.rhos.empty()) throw ValidationError("rhos", "must not be empty");
  for (double r : p.rhos) {
    if (!(r > -1 && r < 1)) throw ValidationError("rhos", "rho must lie in (-1, 1), got " + format_number(r));
  }
  // Contour panels need a proper density, so the unregularized limit is excluded there.
  const bool panels = figure == 1 || figure == 2;
  for (double e : p.epsilons) {
    if (panels ? !(e > 0) : !(e >= 0)) {
      throw ValidationError("epsilons", std::string("epsilon must be ") + (panels ? "> 0" : ">= 0") +
                                            ", got " + format_number(e));
    }
  }
}

ProblemSpec base_spec(const FigureParams& p) {
  ProblemSpec s;
  s.d = 1;
  s.a = Eigen::MatrixXd::Constant(1, 1, p.a);
  s.b = Eigen::MatrixXd::Constant(1, 1, p.b);
  s.reference.kind = ReferenceKind::Product;
  return s;
}

std::string label(const char* name, double v) { return std::string(name) + "=" + format_number(v); }

ContourPanel density_panel(const std::string& title, const SweepRow& row, double a, double b) {
  ContourPanel panel;
  panel.title = title;
  const double half = 3.5 * std::sqrt(std::max(a, b));
  panel.xs = Eigen::VectorXd::LinSpaced(201, -half, half);
  panel.ys = panel.xs;
  if (row.status != "ok") {
    panel.title += " (" + row.status + ")";
    panel.values = Eigen::MatrixXd::Zero(201, 201);
    return panel;
  }
  const double c = row.c(0, 0);
  const double det = a * b - c * c;
  const double peak = 1.0 / (2.0 * M_PI * std::sqrt(det));
  panel.values.resize(201, 201);
  for (int i = 0; i < 201; ++i) {
    for (int j = 0; j < 201; ++j) {
      const double x = panel.xs(i), y = panel.ys(j);
      const double q = (b * x * x - 2.0 * c * x * y + a * y * y) / det;
      panel.values(i, j) = peak * std::exp(-0.5 * q);
    }
  }
  for (double f : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) panel.levels.push_back(f * peak);
  return panel;
}

}  // namespace

PlotOutput run_plot(int figure, const Json& params) {
  const FigureParams p = parse_params(figure, params);
  validate(figure, p);
  const ProblemSpec base = base_spec(p);

  std::vector<SweepRow> rows;
  std::vector<std::string> curves;
  PlotOutput out;

  if (figure == 1 || figure == 2) {
    std::vector<ContourPanel> panels;
    const bool by_eps = figure == 1;
    const double rho = p.rhos.front();
    const double eps = p.epsilons.front();
    const std::vector<double>& values = by_eps ? p.epsilons : p.rhos;
    for (double v : values) {
      const SweepRow row = by_eps ? evaluate_point(base, v, rho) : evaluate_point(base, eps, v);
      const std::string name = by_eps ? label("eps", v) : label("rho", v);
      std::string title = name;
      if (row.status == "ok") title += ", c=" + format_fixed(row.c(0, 0), 4);
      panels.push_back(density_panel(title, row, p.a, p.b));
      rows.push_back(row);
      curves.push_back(name);
    }
    const std::string heading = by_eps
        ? "Optimal coupling density, rho=" + format_number(rho) + ", varying epsilon"
        : "Optimal coupling density, eps=" + format_number(eps) + ", varying reference correlation";
    out.svg = render_contour_panels(heading, panels);
  } else {
    LineChart chart;
    const bool over_eps = figure == 3;
    chart.title = over_eps ? "Bias of the entropic cost against epsilon"
                           : "Bias of the entropic cost against reference correlation";
    chart.x_label = over_eps ? "epsilon" : "rho";
    chart.y_label = "entropic cost - squared Bures-Wasserstein";
    const std::vector<double>& outer = over_eps ? p.rhos : p.epsilons;
    const std::vector<double>& inner = over_eps ? p.epsilons : p.rhos;
    for (double o : outer) {
      Series s;
      s.label = over_eps ? label("rho", o) : label("eps", o);
      for (double v : inner) {
        const SweepRow row = over_eps ? evaluate_point(base, v, o) : evaluate_point(base, o, v);
        s.x.push_back(v);
        s.y.push_back(row.status == "ok" ? row.bias : NAN);
        rows.push_back(row);
        curves.push_back(s.label);
      }
      chart.series.push_back(std::move(s));
    }
    out.svg = render_line_chart(chart);
  }
  out.csv = sweep_csv(rows, 1, &curves);
  return out;
}

}  // namespace gausseot::cli
