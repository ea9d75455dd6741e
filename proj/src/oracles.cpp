#include "gausseot/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gausseot {

namespace {

std::string num(double v) { return detail::number_string(v); }

/// Objective value, or +inf on the boundary so the line search can compare.
double objective_or_inf(const Eigen::MatrixXd& c, const Problem<double>& problem) {
  const ObjectiveValue<double> v = primal_objective(c, problem);
  return v.is_boundary() ? std::numeric_limits<double>::infinity() : v.value();
}

}  // namespace

void DescentOptions::validate() const {
  if (max_iterations <= 0) throw ValidationError("max_iterations", "must be positive");
  if (!(gradient_tolerance > 0)) throw ValidationError("gradient_tolerance", "must be positive");
  if (!(initial_step > 0)) throw ValidationError("initial_step", "must be positive");
  if (!(backtracking_factor > 0 && backtracking_factor < 1)) {
    throw ValidationError("backtracking_factor", "must lie in (0, 1)");
  }
  if (!(armijo_constant > 0 && armijo_constant < 1)) {
    throw ValidationError("armijo_constant", "must lie in (0, 1)");
  }
}

Eigen::MatrixXd primal_descent(const Problem<double>& problem, const DescentOptions& opts,
                               DescentReport* report) {
  opts.validate();
  const Index d = problem.dim();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  double f = objective_or_inf(c, problem);
  Eigen::MatrixXd g = primal_gradient(c, problem);
  double step = opts.initial_step;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const double gn2 = g.squaredNorm();
    const double gn = std::sqrt(gn2);
    if (gn < opts.gradient_tolerance) {
      if (report) *report = {it, gn, f};
      return c;
    }
    double t = step;
    Eigen::MatrixXd next;
    double f_next = std::numeric_limits<double>::infinity();
    // Slack: once the decrease is below the resolution of f, Armijo can never hold.
    const double slack = 1e-14 * (1.0 + std::abs(f));
    bool accepted = false;
    for (int k = 0; k < 200; ++k) {
      next = c - t * g;
      f_next = objective_or_inf(next, problem);
      if (std::isfinite(f_next) && f_next <= f - opts.armijo_constant * t * gn2 + slack) {
        accepted = true;
        break;
      }
      t *= opts.backtracking_factor;
    }
    if (!accepted) {
      throw NonConvergence("primal_descent: line search failed at iteration " + std::to_string(it) +
                               ", gradient norm " + num(gn),
                           gn);
    }
    const Eigen::MatrixXd g_next = primal_gradient(next, problem);
    const Eigen::MatrixXd s = next - c;
    const double sy = hs_inner(s, Eigen::MatrixXd(g_next - g));
    step = sy > 0 ? s.squaredNorm() / sy : opts.initial_step;
    c = next;
    f = f_next;
    g = g_next;
  }
  const double gn = g.norm();
  if (report) *report = {opts.max_iterations, gn, f};
  throw NonConvergence("primal_descent: " + std::to_string(opts.max_iterations) +
                           " iterations, gradient norm " + num(gn),
                       gn);
}

Eigen::MatrixXd finite_difference_gradient(const Eigen::MatrixXd& c, const Problem<double>& problem,
                                           double step) {
  if (!(step > 0)) throw DomainError("finite_difference_gradient: step must be positive");
  const Index d = problem.dim();
  detail::require_square(c, d, "finite_difference_gradient");
  Eigen::MatrixXd out(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      Eigen::MatrixXd plus = c;
      Eigen::MatrixXd minus = c;
      plus(i, j) += step;
      minus(i, j) -= step;
      const ObjectiveValue<double> fp = primal_objective(plus, problem);
      const ObjectiveValue<double> fm = primal_objective(minus, problem);
      if (fp.is_boundary() || fm.is_boundary()) {
        throw DomainError("finite_difference_gradient: stencil leaves the PD cone at entry (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      out(i, j) = (fp.value() - fm.value()) / (2.0 * step);
    }
  }
  return out;
}

DualResiduals dual_residuals(const SpdMatrix<double>& f, const SpdMatrix<double>& g,
                             const Problem<double>& problem) {
  const Index d = problem.dim();
  if (f.dim() != d || g.dim() != d) throw DomainError("dual_residuals: dimension mismatch");
  const double eps = problem.epsilon();
  const Eigen::MatrixXd m = m_eps(problem);
  const Eigen::MatrixXd& fm = f.matrix();
  const Eigen::MatrixXd r1 =
      fm * problem.a().matrix() * fm - eps * fm - m * problem.b().matrix() * m.transpose();
  const Eigen::MatrixXd r2 =
      eps * problem.b().inverse() + m.transpose() * f.inverse() * m - g.matrix();
  return {r1.norm(), r2.norm()};
}

// ---------------------------------------------------------------------------
// Grids and Sinkhorn

void Grid1D::validate() const {
  if (points < 3 || points % 2 == 0) {
    throw DomainError("grid needs an odd number of points >= 3, got " + std::to_string(points));
  }
  if (!(half_width >= 4.0)) {
    throw DomainError("grid half-width must be at least 4 standard deviations, got " + num(half_width));
  }
  if (!std::isfinite(center)) throw DomainError("grid center must be finite");
}

Eigen::VectorXd Grid1D::nodes() const {
  validate();
  return Eigen::VectorXd::LinSpaced(points, -half_width, half_width);
}

namespace {

/// Standard normal mass of [lo, hi], accurate in both tails.
double normal_mass(double lo, double hi) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  if (lo >= 0) return 0.5 * (std::erfc(lo * kInvSqrt2) - std::erfc(hi * kInvSqrt2));
  if (hi <= 0) return 0.5 * (std::erfc(-hi * kInvSqrt2) - std::erfc(-lo * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(-lo * kInvSqrt2) - 0.5 * std::erfc(hi * kInvSqrt2);
}

/// Cell masses of the standard normal on a uniform grid, tails folded in.
Eigen::VectorXd cell_masses(const Eigen::VectorXd& u) {
  const Index n = u.size();
  Eigen::VectorXd w(n);
  const double inf = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double lo = i == 0 ? -inf : 0.5 * (u(i - 1) + u(i));
    const double hi = i == n - 1 ? inf : 0.5 * (u(i) + u(i + 1));
    w(i) = normal_mass(lo, hi);
  }
  return w / w.sum();
}

struct Marginal {
  Eigen::MatrixXd nodes;  // N x d
  Eigen::VectorXd weights;
};

/// Tensor grid in whitened coordinates, mapped through cov^{1/2}.
Marginal discretize(const SpdMatrix<double>& cov, const Grid1D& grid) {
  const Eigen::VectorXd u = grid.nodes();
  const Eigen::VectorXd w = cell_masses(u);
  const Index n = u.size();
  const Index d = cov.dim();
  const Eigen::MatrixXd root = cov.sqrt();
  Marginal out;
  if (d == 1) {
    out.nodes = (grid.center + root(0, 0) * u.array()).matrix();
    out.weights = w;
    return out;
  }
  out.nodes.resize(n * n, 2);
  out.weights.resize(n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Eigen::Vector2d z(u(i), u(j));
      out.nodes.row(i * n + j) = (root * z).transpose().array() + grid.center;
      out.weights(i * n + j) = w(i) * w(j);
    }
  }
  return out;
}

/// log sum_k exp(col(k) + shift(k)) for each column of m (column-major, contiguous).
void column_logsumexp(const Eigen::MatrixXd& m, const Eigen::VectorXd& shift, Eigen::VectorXd& out) {
  const Index rows = m.rows();
  for (Index j = 0; j < m.cols(); ++j) {
    const double* col = m.data() + j * rows;
    double top = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < rows; ++k) top = std::max(top, col[k] + shift(k));
    double s = 0.0;
    for (Index k = 0; k < rows; ++k) s += std::exp(col[k] + shift(k) - top);
    out(j) = top + std::log(s);
  }
}

double log_sum_exp(const Eigen::MatrixXd& m) {
  const double top = m.maxCoeff();
  return top + std::log((m.array() - top).exp().sum());
}

}  // namespace

SinkhornResult sinkhorn_discrete(const Problem<double>& problem, const Grid1D& grid,
                                 const SinkhornOptions& opts) {
  grid.validate();
  const Index d = problem.dim();
  if (d != 1 && d != 2) {
    throw DomainError("sinkhorn_discrete supports d in {1, 2}, got " + std::to_string(d));
  }
  if (!(grid.half_width >= 5.0)) {
    throw DomainError("sinkhorn_discrete: grid must cover at least 5 standard deviations");
  }
  const double nodes_per_marginal = std::pow(static_cast<double>(grid.points), static_cast<double>(d));
  if (nodes_per_marginal * nodes_per_marginal > 2.0e7) {
    throw DomainError("sinkhorn_discrete: kernel with " + num(nodes_per_marginal) +
                      "^2 entries is too large; use fewer grid points");
  }
  if (opts.max_iterations <= 0 || !(opts.tolerance > 0)) {
    throw ValidationError("sinkhorn", "max_iterations and tolerance must be positive");
  }

  const double eps = problem.epsilon();
  const Marginal mu = discretize(problem.a(), grid);
  const Marginal nu = discretize(problem.b(), grid);
  const Index nx = mu.nodes.rows();
  const Index ny = nu.nodes.rows();
  const Eigen::MatrixXd gamma = problem.gamma().assemble();
  const Eigen::MatrixXd g11 = gamma.topLeftCorner(d, d);
  const Eigen::MatrixXd g12 = gamma.topRightCorner(d, d);
  const Eigen::MatrixXd g22 = gamma.bottomRightCorner(d, d);

  Eigen::MatrixXd log_ref(nx, ny);
  Eigen::MatrixXd cost(nx, ny);
  for (Index j = 0; j < ny; ++j) {
    const Eigen::VectorXd y = nu.nodes.row(j).transpose();
    const double yy = y.dot(g22 * y);
    const Eigen::VectorXd g12y = g12 * y;
    for (Index i = 0; i < nx; ++i) {
      const Eigen::VectorXd x = mu.nodes.row(i).transpose();
      log_ref(i, j) = -0.5 * (x.dot(g11 * x) + 2.0 * x.dot(g12y) + yy);
      cost(i, j) = (x - y).squaredNorm();
    }
  }
  log_ref.array() -= log_sum_exp(log_ref);

  const Eigen::MatrixXd log_kernel = log_ref - cost / (2.0 * eps);
  const Eigen::MatrixXd log_kernel_t = log_kernel.transpose();
  const Eigen::VectorXd log_mu = mu.weights.array().log().matrix();
  const Eigen::VectorXd log_nu = nu.weights.array().log().matrix();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(nx);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ny);
  Eigen::VectorXd lse_rows(nx);
  Eigen::VectorXd lse_cols(ny);
  double violation = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    column_logsumexp(log_kernel_t, g, lse_rows);
    f = log_mu - lse_rows;
    column_logsumexp(log_kernel, f, lse_cols);
    g = log_nu - lse_cols;
    // Columns are exact after the g update; measure the row marginal.
    column_logsumexp(log_kernel_t, g, lse_rows);
    violation = ((f + lse_rows).array().exp() - mu.weights.array()).abs().sum();
    if (!std::isfinite(violation) || !f.allFinite() || !g.allFinite()) {
      throw NumericalFailure("sinkhorn_discrete: kernel underflow at epsilon " + num(eps) +
                             "; use a narrower grid");
    }
    if (violation < opts.tolerance) break;
  }
  if (it == opts.max_iterations) {
    throw NonConvergence("sinkhorn_discrete: marginal violation " + num(violation) + " after " +
                             std::to_string(opts.max_iterations) + " iterations",
                         violation);
  }

  Eigen::MatrixXd log_plan = log_kernel;
  log_plan.colwise() += f;
  log_plan.rowwise() += g.transpose();
  const Eigen::MatrixXd plan = log_plan.array().exp().matrix();
  const double objective =
      (plan.array() * cost.array()).sum() +
      2.0 * eps * (plan.array() * (log_plan - log_ref).array()).sum();

  SinkhornResult out{DiscreteCoupling{mu.nodes, nu.nodes, plan, mu.weights, nu.weights},
                     objective, it + 1, violation};
  return out;
}

Eigen::MatrixXd empirical_cross_covariance(const DiscreteCoupling& coupling) {
  if (coupling.weights.rows() != coupling.x_nodes.rows() ||
      coupling.weights.cols() != coupling.y_nodes.rows()) {
    throw DomainError("empirical_cross_covariance: weights do not match node counts");
  }
  return coupling.x_nodes.transpose() * coupling.weights * coupling.y_nodes;
}

double kl_quadrature_1d(const GaussianMeasure<double>& p1, const GaussianMeasure<double>& p0,
                        const Grid1D& grid) {
  grid.validate();
  if (p1.dim() != 1 || p0.dim() != 1) throw DomainError("kl_quadrature_1d: measures must be 1-D");
  if (!(grid.half_width >= 10.0)) {
    throw DomainError("kl_quadrature_1d: grid must cover at least 10 standard deviations");
  }
  const double v1 = p1.covariance().matrix()(0, 0);
  const double v0 = p0.covariance().matrix()(0, 0);
  const double sd = std::sqrt(v1);
  const double h = grid.spacing() * sd;
  const double two_pi = 2.0 * M_PI;
  const Eigen::VectorXd u = grid.nodes();
  double total = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double x = grid.center + sd * u(i);
    const double log_p1 = -0.5 * x * x / v1 - 0.5 * std::log(two_pi * v1);
    const double log_p0 = -0.5 * x * x / v0 - 0.5 * std::log(two_pi * v0);
    const double weight = (i == 0 || i == u.size() - 1) ? 0.5 : 1.0;
    total += weight * std::exp(log_p1) * (log_p1 - log_p0);
  }
  return total * h;
}

}  // namespace gausseot
