#pragma once

// Numerical cross-checks for the closed form. Nothing here reuses the
// closed-form solution itself: descent only sees the objective and its
// gradient, Sinkhorn only sees the cost kernel and the reference density.

#include <Eigen/Dense>

#include "gausseot/closed_form.hpp"
#include "gausseot/gaussian.hpp"

namespace gausseot {

struct DescentOptions {
  int max_iterations = 200000;
  double gradient_tolerance = 1e-10;
  double initial_step = 1.0;
  double backtracking_factor = 0.5;
  double armijo_constant = 1e-4;

  void validate() const;
};

struct DescentReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

/// Gradient descent on the log-det barrier objective from C = 0, Barzilai-Borwein
/// trial steps with Armijo backtracking. Iterates never leave the PD cone.
Eigen::MatrixXd primal_descent(const Problem<double>& problem, const DescentOptions& opts = {},
                               DescentReport* report = nullptr);

/// Central differences of primal_objective, entry by entry.
Eigen::MatrixXd finite_difference_gradient(const Eigen::MatrixXd& c, const Problem<double>& problem,
                                           double step);

struct DualResiduals {
  double r1;  // ||F A F - eps F - M B M^T||
  double r2;  // ||eps B^{-1} + M^T F^{-1} M - G||
};

DualResiduals dual_residuals(const SpdMatrix<double>& f, const SpdMatrix<double>& g,
                             const Problem<double>& problem);

/// Symmetric grid, half_width measured in standard deviations.
struct Grid1D {
  double center = 0.0;
  double half_width = 6.0;
  int points = 401;

  void validate() const;
  Eigen::VectorXd nodes() const;  // center-free, in units of one standard deviation
  double spacing() const { return 2.0 * half_width / (points - 1); }
};

struct DiscreteCoupling {
  Eigen::MatrixXd x_nodes;  // one node per row, d columns
  Eigen::MatrixXd y_nodes;
  Eigen::MatrixXd weights;  // x_nodes.rows() x y_nodes.rows()
  Eigen::VectorXd mu_weights;
  Eigen::VectorXd nu_weights;
};

struct SinkhornOptions {
  int max_iterations = 100000;
  double tolerance = 1e-12;  // L1 violation of the row marginal
};

struct SinkhornResult {
  DiscreteCoupling coupling;
  double cost;  // sum pi |x - y|^2 + 2 eps KL(pi | pi_ref)
  int iterations;
  double marginal_violation;
};

/// Log-domain Sinkhorn on the Schrodinger-bridge kernel exp(-|x-y|^2 / (2 eps)) pi_ref
/// for d in {1, 2}. Marginal nodes sit at A^{1/2} u (resp. B^{1/2} u) for u on the
/// tensor grid and carry their exact Gaussian cell mass; reference weights are the
/// N(Sigma) density on the node pairs, normalized.
SinkhornResult sinkhorn_discrete(const Problem<double>& problem, const Grid1D& grid,
                                 const SinkhornOptions& opts = {});

/// sum_ij w_ij x_i y_j^T.
Eigen::MatrixXd empirical_cross_covariance(const DiscreteCoupling& coupling);

/// Trapezoid rule for int p1 log(p1 / p0) on a grid scaled to p1's standard deviation.
double kl_quadrature_1d(const GaussianMeasure<double>& p1, const GaussianMeasure<double>& p0,
                        const Grid1D& grid);

}  // namespace gausseot
