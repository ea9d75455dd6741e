#include <doctest.h>

#include "gausseot/oracles.hpp"
#include "support.hpp"

using namespace gausseot;
using namespace testing;

TEST_CASE("primal_descent reaches the closed form") {
  const auto id_case = product_problem(scalar(1), scalar(1), 2.0);
  DescentReport report;
  const MatrixXd c = primal_descent(id_case, {}, &report);
  CHECK(std::abs(c(0, 0) - (std::sqrt(2.0) - 1)) < 1e-8);
  CHECK(report.gradient_norm <= 1e-10);
  CHECK(report.iterations > 0);

  std::mt19937_64 rng(1);
  const SpdMatrix<double> a(random_spd(3, rng));
  const SpdMatrix<double> b(random_spd(3, rng));
  const Problem<double> p3(a, b, ReferencePlan<double>::correlation(random_correlation(3, rng)), 0.8);
  CHECK((primal_descent(p3) - solve_closed_form(p3).c_eps).norm() < 1e-6 * p3.scale());

  // Small eps: close to the unregularized coupling ab in 1-D.
  const auto small = product_problem(scalar(4), scalar(1), 0.01);
  CHECK(primal_descent(small)(0, 0) == doctest::Approx(2.0).epsilon(1e-2));

  for (const auto& p : seeded_problem_set(2, 30)) {
    CHECK((primal_descent(p) - solve_closed_form(p).c_eps).norm() < 1e-6 * p.scale());
  }
}

TEST_CASE("primal_descent reports non-convergence and bad options") {
  DescentOptions capped;
  capped.max_iterations = 1;
  CHECK_THROWS_AS(primal_descent(product_problem(scalar(4), scalar(1), 0.5), capped), NonConvergence);
  DescentOptions bad;
  bad.backtracking_factor = 1.5;
  CHECK_THROWS_AS(primal_descent(product_problem(scalar(1), scalar(1), 1.0), bad), ValidationError);
}

TEST_CASE("finite_difference_gradient") {
  std::mt19937_64 rng(3);
  for (const auto& p : seeded_problem_set(3, 20)) {
    const MatrixXd c = 0.6 * p.a().sqrt() * random_correlation(p.dim(), rng, 0.9) * p.b().sqrt();
    const MatrixXd exact = primal_gradient(c, p);
    const double err5 = (finite_difference_gradient(c, p, 1e-5) - exact).cwiseAbs().maxCoeff();
    CHECK(err5 < 1e-6 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
  }

  // Central differences are second order: halving h quarters the truncation error.
  const auto p = problem_1d(2.0, 1.0, 0.3, 0.7);
  const MatrixXd c = scalar(0.9);
  const double exact = primal_gradient(c, p)(0, 0);
  const double e1 = std::abs(finite_difference_gradient(c, p, 2e-2)(0, 0) - exact);
  const double e2 = std::abs(finite_difference_gradient(c, p, 1e-2)(0, 0) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));

  const auto s = solve_closed_form(p);
  CHECK(finite_difference_gradient(s.c_eps, p, 1e-6).norm() < 1e-4);

  // The stencil crosses the boundary |c| = sqrt(ab).
  CHECK_THROWS_AS(finite_difference_gradient(scalar(std::sqrt(2.0) - 1e-4), p, 1e-3), DomainError);
  CHECK_THROWS_AS(finite_difference_gradient(c, p, 0.0), DomainError);
}

TEST_CASE("dual_residuals") {
  const MatrixXd id = MatrixXd::Identity(3, 3);
  const auto p = product_problem(id, id, 1.0);
  // f = g = I: r1 = ||I - I - I|| = sqrt 3, r2 = ||I + I - I|| = sqrt 3.
  const DualResiduals r = dual_residuals(spd(id), spd(id), p);
  CHECK(r.r1 == doctest::Approx(std::sqrt(3.0)));
  CHECK(r.r2 == doctest::Approx(std::sqrt(3.0)));

  const auto duals = dual_potentials(p);
  const DualResiduals at_opt = dual_residuals(duals.f, duals.g, p);
  CHECK(at_opt.r1 < 1e-12);
  CHECK(at_opt.r2 < 1e-12);
  const DualResiduals moved =
      dual_residuals(SpdMatrix<double>(MatrixXd(duals.f.matrix() + 0.1 * id)), duals.g, p);
  CHECK(moved.r1 > at_opt.r1 + 1e-3);
  CHECK_THROWS_AS(dual_residuals(spd(scalar(1)), spd(scalar(1)), p), DomainError);
}

TEST_CASE("Grid1D validation") {
  CHECK_NOTHROW(Grid1D{}.validate());
  CHECK_THROWS_AS((Grid1D{0.0, 6.0, 400}.validate()), DomainError);
  CHECK_THROWS_AS((Grid1D{0.0, 6.0, 1}.validate()), DomainError);
  CHECK_THROWS_AS((Grid1D{0.0, 3.0, 401}.validate()), DomainError);
  CHECK(Grid1D{}.nodes().size() == 401);
  CHECK(Grid1D{}.spacing() == doctest::Approx(0.03));
}

TEST_CASE("sinkhorn_discrete against the 1-D closed form") {
  struct Case {
    double rho, eps;
  };
  for (const Case k : {Case{0.0, 2.0}, Case{0.9, 2.0}, Case{0.5, 1.0}}) {
    const auto p = problem_1d(1.0, 1.0, k.rho, k.eps);
    const auto exact = solve_closed_form(p);
    const SinkhornResult r = sinkhorn_discrete(p, Grid1D{});
    CHECK(std::abs(r.cost - exact.cost) < 2e-2);
    const double c = empirical_cross_covariance(r.coupling)(0, 0);
    CHECK(std::abs(c - exact.c_eps(0, 0)) < 2e-2);
    CHECK(r.marginal_violation < 1e-8);
    CHECK(std::abs(r.coupling.weights.sum() - 1) < 1e-10);
    CHECK((r.coupling.weights.rowwise().sum() - r.coupling.mu_weights).lpNorm<1>() < 1e-8);
    CHECK((r.coupling.weights.colwise().sum().transpose() - r.coupling.nu_weights).lpNorm<1>() < 1e-8);
  }
}

TEST_CASE("sinkhorn error shrinks under refinement") {
  const auto p = problem_1d(1.0, 1.0, 0.9, 2.0);
  const double exact = solve_closed_form(p).cost;
  const double coarse = std::abs(sinkhorn_discrete(p, Grid1D{0.0, 6.0, 201}).cost - exact);
  const double fine = std::abs(sinkhorn_discrete(p, Grid1D{0.0, 6.0, 801}).cost - exact);
  CHECK(fine < coarse);
}

TEST_CASE("sinkhorn with unequal variances and small epsilon") {
  const auto p = problem_1d(4.0, 1.0, 0.0, 0.2);
  const auto exact = solve_closed_form(p);
  const SinkhornResult r = sinkhorn_discrete(p, Grid1D{});
  CHECK(std::abs(r.cost - exact.cost) < 2e-2);
  CHECK(std::abs(empirical_cross_covariance(r.coupling)(0, 0) - exact.c_eps(0, 0)) < 2e-2);
  // Near the unregularized limit the coupling is close to comonotone.
  CHECK(empirical_cross_covariance(r.coupling)(0, 0) > 1.8);
}

TEST_CASE("sinkhorn in 2-D") {
  const MatrixXd a = mat({{1.5, 0.3}, {0.3, 0.8}});
  const MatrixXd b = mat({{1.0, -0.2}, {-0.2, 1.2}});
  const Problem<double> p(spd(a), spd(b), ReferencePlan<double>::correlation(mat({{0.5, 0.1}, {0.0, 0.3}})), 1.0);
  const auto exact = solve_closed_form(p);
  const SinkhornResult r = sinkhorn_discrete(p, Grid1D{0.0, 5.0, 41});
  CHECK(std::abs(r.cost - exact.cost) < 2e-2 * p.scale());
  CHECK((empirical_cross_covariance(r.coupling) - exact.c_eps).cwiseAbs().maxCoeff() < 2e-2);
  CHECK(r.marginal_violation < 1e-8);
}

TEST_CASE("sinkhorn input guards") {
  const MatrixXd id3 = MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(sinkhorn_discrete(product_problem(id3, id3, 1.0), Grid1D{0.0, 5.0, 11}), DomainError);
  CHECK_THROWS_AS(sinkhorn_discrete(problem_1d(1, 1, 0, 1), Grid1D{0.0, 4.0, 401}), DomainError);
  const MatrixXd id2 = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(sinkhorn_discrete(product_problem(id2, id2, 1.0), Grid1D{0.0, 6.0, 401}), DomainError);
}

TEST_CASE("empirical_cross_covariance") {
  // Independent weights on a grid symmetric about 0.
  DiscreteCoupling prod;
  prod.x_nodes = Eigen::VectorXd::LinSpaced(5, -2, 2);
  prod.y_nodes = prod.x_nodes;
  prod.mu_weights = Eigen::VectorXd::Constant(5, 0.2);
  prod.nu_weights = prod.mu_weights;
  prod.weights = prod.mu_weights * prod.nu_weights.transpose();
  CHECK(std::abs(empirical_cross_covariance(prod)(0, 0)) < 1e-15);

  // Diagonal coupling: the grid variance.
  DiscreteCoupling diag = prod;
  diag.weights = MatrixXd(prod.mu_weights.asDiagonal());
  CHECK(empirical_cross_covariance(diag)(0, 0) == doctest::Approx(2.0));

  DiscreteCoupling broken = prod;
  broken.weights = MatrixXd::Zero(4, 5);
  CHECK_THROWS_AS(empirical_cross_covariance(broken), DomainError);
}

TEST_CASE("kl_quadrature_1d") {
  const Grid1D grid{0.0, 12.0, 4001};
  const GaussianMeasure<double> one(scalar(1));
  const GaussianMeasure<double> two(scalar(2));
  CHECK(std::abs(kl_quadrature_1d(one, one, grid)) < 1e-12);
  CHECK(kl_quadrature_1d(two, one, grid) == doctest::Approx(0.15342640972).epsilon(1e-8));
  CHECK(kl_quadrature_1d(one, two, grid) == doctest::Approx(0.09657359028).epsilon(1e-8));
  for (double e = -1.0; e <= 1.0; e += 0.25) {
    const GaussianMeasure<double> p1(scalar(std::pow(10.0, e)));
    CHECK(std::abs(kl_quadrature_1d(p1, one, grid) - kl_divergence(p1, one)) < 1e-6);
    CHECK(std::abs(kl_quadrature_1d(one, p1, grid) - kl_divergence(one, p1)) < 1e-6);
  }
  CHECK_THROWS_AS(kl_quadrature_1d(one, one, Grid1D{}), DomainError);
  const GaussianMeasure<double> i2(MatrixXd(MatrixXd::Identity(2, 2)));
  CHECK_THROWS_AS(kl_quadrature_1d(i2, i2, grid), DomainError);
}
