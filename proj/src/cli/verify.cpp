#include <algorithm>
#include <cmath>
#include <sstream>

#include "cli/commands.hpp"
#include "gausseot/instances.hpp"
#include "gausseot/oracles.hpp"

namespace gausseot::cli {

namespace {

using Eigen::MatrixXd;

CheckResult below(std::string suite, std::string property, double worst, double threshold,
                  std::string detail) {
  return {std::move(suite), std::move(property), worst < threshold, worst, threshold,
          std::move(detail)};
}

std::vector<Problem<double>> instances(std::uint64_t seed, std::size_t count,
                                       std::vector<Index> dims) {
  ProblemSetOptions opts;
  opts.dims = std::move(dims);
  return seeded_problem_set(seed, count, opts);
}

/// Records the error instead of aborting the whole suite.
template <typename Fn>
CheckResult guarded(const std::string& suite, const std::string& property, double threshold, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {suite, property, false, std::nan(""), threshold, std::string("error: ") + e.what()};
  }
}

void descent_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
  out.push_back(guarded("descent", "descent_vs_closed_form", 1e-6, [&] {
    double worst = 0;
    const auto set = instances(seed, 50, {1, 2, 3, 5});
    for (const auto& p : set) {
      const MatrixXd c = primal_descent(p);
      worst = std::max(worst, (c - solve_closed_form(p).c_eps).norm() / p.scale());
    }
    return below("descent", "descent_vs_closed_form", worst, 1e-6, "50 instances, relative to scale");
  }));
  out.push_back(guarded("descent", "identity_product_eps2", 1e-6, [&] {
    const MatrixXd id = MatrixXd::Identity(2, 2);
    const Problem<double> p{SpdMatrix<double>(id), SpdMatrix<double>(id), ReferencePlan<double>::product(), 2.0};
    const double err = (primal_descent(p) - (std::sqrt(2.0) - 1.0) * id).norm();
    return below("descent", "identity_product_eps2", err, 1e-6, "C = (sqrt 2 - 1) I");
  }));
}

void duality_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
  const auto set = instances(seed + 1, 50, {1, 2, 3, 5, 10});
  double grad = 0, gap = 0, r1 = 0, r2 = 0, min_block = INFINITY, weak = -INFINITY;
  try {
    for (const auto& p : set) {
      const Solution<double> sol = solve_closed_form(p);
      const double s = p.scale();
      grad = std::max(grad, sol.gradient_residual / s);
      gap = std::max(gap, std::abs(sol.cost - dual_value(sol.duals.f, sol.duals.g, p)) / s);
      const DualResiduals res = dual_residuals(sol.duals.f, sol.duals.g, p);
      r1 = std::max(r1, res.r1 / s);
      r2 = std::max(r2, res.r2 / s);
      const BlockMatrix2x2<double> block(sol.duals.f.sym(), MatrixXd(-sol.intermediates.m_eps),
                                         sol.duals.g.sym());
      const SymEig<double> eig = sym_eig(SymMatrix<double>(block.assemble()));
      min_block = std::min(min_block, eig.eigenvalues.minCoeff() / eig.eigenvalues.maxCoeff());
      const SpdMatrix<double> f_shift(MatrixXd(sol.duals.f.matrix() + 0.1 * MatrixXd::Identity(p.dim(), p.dim())));
      weak = std::max(weak, dual_value(f_shift, sol.duals.g, p) - sol.cost);
    }
  } catch (const std::exception& e) {
    out.push_back({"duality", "closed_form", false, std::nan(""), 0, std::string("error: ") + e.what()});
    return;
  }
  out.push_back(below("duality", "stationarity", grad, 1e-8, "||grad I(C_eps)|| / scale, 50 instances"));
  out.push_back(below("duality", "strong_duality", gap, 1e-8, "|cost - dual value| / scale"));
  out.push_back(below("duality", "dual_system_r1", r1, 1e-8, "||FAF - eps F - MBM^T|| / scale"));
  out.push_back(below("duality", "dual_system_r2", r2, 1e-8, "||eps B^-1 + M^T F^-1 M - G|| / scale"));
  out.push_back({"duality", "dual_feasibility", min_block > 0, min_block, 0.0,
                 "smallest relative eigenvalue of [[F, -M], [-M^T, G]] must be > 0"});
  out.push_back({"duality", "weak_duality_perturbed", weak < 0, weak, 0.0,
                 "dual value at F + 0.1 I minus cost must be < 0"});
}

struct OneDCase {
  double rho;
  double eps;
};

void sinkhorn_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
  const OneDCase cases[] = {{0.0, 2.0}, {0.9, 2.0}, {0.5, 1.0}};
  double cost_err = 0, cov_err = 0, violation = 0;
  bool refines = true;
  double worst_ratio = 0;
  try {
    for (const auto& k : cases) {
      const MatrixXd one = MatrixXd::Identity(1, 1);
      const Problem<double> p{SpdMatrix<double>(one), SpdMatrix<double>(one),
                              ReferencePlan<double>::correlation(MatrixXd::Constant(1, 1, k.rho)), k.eps};
      const Solution1D<double> exact = solve_1d(1.0, 1.0, k.rho, k.eps);
      const SinkhornResult mid = sinkhorn_discrete(p, Grid1D{0.0, 6.0, 401});
      cost_err = std::max(cost_err, std::abs(mid.cost - exact.cost));
      cov_err = std::max(cov_err, std::abs(empirical_cross_covariance(mid.coupling)(0, 0) - exact.c));
      violation = std::max(violation, mid.marginal_violation);
      const double coarse = std::abs(sinkhorn_discrete(p, Grid1D{0.0, 6.0, 201}).cost - exact.cost);
      const double fine = std::abs(sinkhorn_discrete(p, Grid1D{0.0, 6.0, 801}).cost - exact.cost);
      refines = refines && fine < coarse;
      worst_ratio = std::max(worst_ratio, fine / coarse);
    }
  } catch (const std::exception& e) {
    out.push_back({"sinkhorn", "one_dimensional", false, std::nan(""), 2e-2, std::string("error: ") + e.what()});
    return;
  }
  out.push_back(below("sinkhorn", "cost_1d_401", cost_err, 2e-2, "rho/eps in {0/2, 0.9/2, 0.5/1}"));
  out.push_back(below("sinkhorn", "cross_covariance_1d_401", cov_err, 2e-2, "same cases"));
  out.push_back({"sinkhorn", "refinement_201_to_801", refines, worst_ratio, 1.0,
                 "error(801) / error(201) must be < 1 on every case"});
  out.push_back(below("sinkhorn", "marginal_violation", violation, 1e-8, "L1, after convergence"));

  out.push_back(guarded("sinkhorn", "two_dimensional", 2e-2, [&] {
    ProblemSetOptions opts;
    opts.dims = {2};
    opts.kinds = {ReferenceKind::Correlation};
    opts.eps_min = 0.5;
    opts.eps_max = 2.0;
    const auto set = seeded_problem_set(seed + 2, 1, opts);
    const Problem<double>& p = set.front();
    const Solution<double> sol = solve_closed_form(p);
    // Error is O(h^2) in the node spacing; 0.2 sd keeps it near half the threshold.
    const SinkhornResult sk = sinkhorn_discrete(p, Grid1D{0.0, 5.0, 51});
    const double err = std::max(std::abs(sk.cost - sol.cost),
                                (empirical_cross_covariance(sk.coupling) - sol.c_eps).cwiseAbs().maxCoeff());
    return below("sinkhorn", "two_dimensional", err, 2e-2, "51x51 grid on +-5 sd per marginal, cost and max |C| entry");
  }));
}

void gradient_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
  out.push_back(guarded("gradient", "finite_difference_step_1e-6", 1e-5, [&] {
    const auto set = instances(seed + 3, 20, {1, 2, 3, 5});
    std::mt19937_64 rng(seed + 4);
    std::uniform_real_distribution<double> t(0.1, 0.9);
    double worst = 0;
    for (const auto& p : set) {
      const MatrixXd c = t(rng) * solve_closed_form(p).c_eps;
      const MatrixXd fd = finite_difference_gradient(c, p, 1e-6);
      worst = std::max(worst, (fd - primal_gradient(c, p)).cwiseAbs().maxCoeff());
    }
    return below("gradient", "finite_difference_step_1e-6", worst, 1e-5,
                 "max entry error, 20 instances at interior points t C_eps");
  }));
  out.push_back(guarded("gradient", "finite_difference_at_optimum", 1e-4, [&] {
    const auto set = instances(seed + 5, 20, {1, 2, 3, 5});
    double worst = 0;
    for (const auto& p : set) {
      worst = std::max(worst, finite_difference_gradient(solve_closed_form(p).c_eps, p, 1e-6).norm());
    }
    return below("gradient", "finite_difference_at_optimum", worst, 1e-4, "||FD gradient at C_eps||");
  }));
}

void kl_suite(std::vector<CheckResult>& out) {
  out.push_back(guarded("kl", "quadrature_vs_closed_form", 1e-6, [&] {
    const Grid1D grid{0.0, 12.0, 4001};
    double worst = 0;
    for (int k = 0; k <= 40; ++k) {
      const double ratio = std::pow(10.0, -1.0 + k / 20.0);
      const GaussianMeasure<double> p(MatrixXd::Constant(1, 1, ratio));
      const GaussianMeasure<double> q(MatrixXd::Constant(1, 1, 1.0));
      worst = std::max(worst, std::abs(kl_quadrature_1d(p, q, grid) - kl_divergence(p, q)));
      worst = std::max(worst, std::abs(kl_quadrature_1d(q, p, grid) - kl_divergence(q, p)));
    }
    return below("kl", "quadrature_vs_closed_form", worst, 1e-6, "variance ratios in [0.1, 10], both directions");
  }));
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"descent", "duality", "sinkhorn", "gradient", "kl"};
  return names;
}

std::vector<CheckResult> run_verify(const std::string& suite, std::uint64_t seed) {
  const auto& names = verify_suites();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ValidationError("suite", "unknown suite \"" + suite +
                                       "\"; expected all, descent, duality, sinkhorn, gradient or kl");
  }
  std::vector<CheckResult> out;
  const auto wants = [&](const char* s) { return suite == "all" || suite == s; };
  if (wants("descent")) descent_suite(seed, out);
  if (wants("duality")) duality_suite(seed, out);
  if (wants("sinkhorn")) sinkhorn_suite(seed, out);
  if (wants("gradient")) gradient_suite(seed, out);
  if (wants("kl")) kl_suite(out);
  return out;
}

std::string verify_text(const std::vector<CheckResult>& results, bool quiet) {
  std::ostringstream os;
  std::size_t passed = 0;
  for (const auto& r : results) {
    if (r.passed) ++passed;
    if (quiet && r.passed) continue;
    os << (r.passed ? "PASS " : "FAIL ") << r.suite << "/" << r.property
       << " worst=" << format_number(r.worst) << " threshold=" << format_number(r.threshold);
    if (!r.detail.empty()) os << " (" << r.detail << ")";
    os << "\n";
  }
  os << passed << "/" << results.size() << " properties passed\n";
  return os.str();
}

Json verify_json(const std::vector<CheckResult>& results) {
  Json j;
  Json list = Json::array();
  bool all = true;
  for (const auto& r : results) {
    Json e;
    e["suite"] = r.suite;
    e["property"] = r.property;
    e["passed"] = r.passed;
    e["worst"] = r.worst;
    e["threshold"] = r.threshold;
    e["detail"] = r.detail;
    list.push_back(std::move(e));
    all = all && r.passed;
  }
  j["status"] = all ? "pass" : "fail";
  j["results"] = std::move(list);
  return j;
}

}  // namespace gausseot::cli
