#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gausseot/gaussian.hpp"
#include "support.hpp"

using namespace gausseot;
using namespace testing;

TEST_CASE("kl_divergence closed form") {
  const GaussianMeasure<double> one(scalar(1));
  const GaussianMeasure<double> two(scalar(2));
  CHECK(kl_divergence(one, one) == 0);
  CHECK(kl_divergence(two, one) == doctest::Approx(0.15342640972).epsilon(1e-10));
  CHECK(kl_divergence(one, two) == doctest::Approx(0.09657359028).epsilon(1e-10));
  const GaussianMeasure<double> i2(MatrixXd::Identity(2, 2));
  const GaussianMeasure<double> two_i2(MatrixXd(2 * MatrixXd::Identity(2, 2)));
  CHECK(kl_divergence(two_i2, i2) == doctest::Approx(1 - std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(kl_divergence(one, i2), DomainError);
  CHECK_THROWS_AS(GaussianMeasure<double>(mat({{1, 2}, {2, 1}})), DomainError);
}

TEST_CASE("kl_divergence is nonnegative and vanishes only on equal covariances") {
  std::mt19937_64 rng(7);
  for (Index d : {1, 2, 3, 5}) {
    for (int t = 0; t < 50; ++t) {
      const GaussianMeasure<double> p(random_spd(d, rng));
      const GaussianMeasure<double> q(random_spd(d, rng));
      CHECK(kl_divergence(p, q) > 0);
      CHECK(std::abs(kl_divergence(p, p)) < 1e-12);
    }
  }
}

TEST_CASE("bures_wasserstein_sq") {
  CHECK(bures_wasserstein_sq(spd(scalar(4)), spd(scalar(1))) == doctest::Approx(1).epsilon(1e-15));
  CHECK(std::abs(bures_wasserstein_sq(spd(scalar(4)), spd(scalar(1))) - 1) < 1e-12);
  CHECK(bures_wasserstein_sq(spd(mat({{1, 0}, {0, 4}})), spd(mat({{9, 0}, {0, 16}}))) ==
        doctest::Approx(8).epsilon(1e-14));

  std::mt19937_64 rng(17);
  for (Index d : {1, 2, 3, 5, 10}) {
    for (int t = 0; t < 20; ++t) {
      const SpdMatrix<double> a(random_spd(d, rng));
      const SpdMatrix<double> b(random_spd(d, rng));
      CHECK(bures_wasserstein_sq(a, a) < 1e-12);
      CHECK(bures_wasserstein_sq(a, b) >= 0);
      CHECK(std::abs(bures_wasserstein_sq(a, b) - bures_wasserstein_sq(b, a)) < 1e-10);
    }
  }
}

TEST_CASE("bures_wasserstein_sq in 1-D matches the monotone discrete transport plan") {
  // Quantile coupling of 200 equal-mass points is the optimal plan in 1-D.
  const double sa = 2.0, sb = 1.0;
  const int n = 200;
  double cost = 0;
  for (int i = 0; i < n; ++i) {
    // Median of the i-th equal-mass cell of the standard normal, by bisection on erfc.
    const double p = (i + 0.5) / n;
    double lo = -10, hi = 10;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    const double z = 0.5 * (lo + hi);
    cost += (sa * z - sb * z) * (sa * z - sb * z) / n;
  }
  CHECK(std::abs(cost - bures_wasserstein_sq(spd(scalar(4)), spd(scalar(1)))) < 2e-2);
}

TEST_CASE("transport_cost") {
  const CouplingCovariance<double> indep(spd(scalar(2)), spd(scalar(3)), scalar(0));
  CHECK(transport_cost(indep) == 5);
  const CouplingCovariance<double> ident(spd(scalar(1)), spd(scalar(1)), scalar(1));
  CHECK(transport_cost(ident) == 0);

  // <Y, X_C> with Y = [[I, -I], [-I, I]].
  std::mt19937_64 rng(23);
  const SpdMatrix<double> a(random_spd(3, rng));
  const SpdMatrix<double> b(random_spd(3, rng));
  const auto x = coupling_from_correlation(a, b, CorrelationMatrix<double>(random_correlation(3, rng)));
  MatrixXd y(6, 6);
  const MatrixXd id = MatrixXd::Identity(3, 3);
  y << id, -id, -id, id;
  CHECK(transport_cost(x) == doctest::Approx(hs_inner(y, x.joint())).epsilon(1e-13));
}

TEST_CASE("transport_cost agrees with Monte-Carlo E|X - Y|^2") {
  std::mt19937_64 rng(29);
  const Index d = 2;
  const SpdMatrix<double> a(random_spd(d, rng));
  const SpdMatrix<double> b(random_spd(d, rng));
  const auto x = coupling_from_correlation(a, b, CorrelationMatrix<double>(random_correlation(d, rng)));
  const MatrixXd l = Eigen::LLT<MatrixXd>(x.joint()).matrixL();
  std::normal_distribution<double> z;
  const int n = 1000000;
  double sum = 0, sum_sq = 0;
  Eigen::VectorXd u(2 * d);
  for (int k = 0; k < n; ++k) {
    for (Index i = 0; i < 2 * d; ++i) u(i) = z(rng);
    const Eigen::VectorXd v = l * u;
    const double s = (v.head(d) - v.tail(d)).squaredNorm();
    sum += s;
    sum_sq += s * s;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - transport_cost(x)) < 3 * se);
}

TEST_CASE("correlation_factor and coupling_from_correlation") {
  const CouplingCovariance<double> zero(spd(scalar(4)), spd(scalar(1)), scalar(0));
  CHECK(correlation_factor(zero).matrix()(0, 0) == 0);
  const CouplingCovariance<double> half(spd(scalar(4)), spd(scalar(1)), scalar(1));
  CHECK(correlation_factor(half).matrix()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  const auto prod = coupling_from_correlation(spd(scalar(1)), spd(scalar(1)), CorrelationMatrix<double>(scalar(0)));
  CHECK(prod.joint() == MatrixXd::Identity(2, 2));

  std::mt19937_64 rng(31);
  const SpdMatrix<double> a(random_spd(3, rng));
  const auto comonotone = coupling_from_correlation(a, a, CorrelationMatrix<double>(MatrixXd::Identity(3, 3)));
  CHECK(rel(comonotone.c(), a.matrix()) < 1e-12);
  CHECK_FALSE(comonotone.is_nondegenerate());

  const auto rho = coupling_from_correlation(spd(scalar(1)), spd(scalar(1)), CorrelationMatrix<double>(scalar(0.5)));
  CHECK(rho.joint() == mat({{1, 0.5}, {0.5, 1}}));
  CHECK(rho.is_nondegenerate());

  CHECK_THROWS_AS(CorrelationMatrix<double>(scalar(1.01)), DomainError);
  CHECK_THROWS_AS(CouplingCovariance<double>(spd(scalar(1)), spd(scalar(1)), scalar(1.01)), DomainError);
  CHECK_THROWS_AS(CouplingCovariance<double>(spd(mat({{1, 0}, {0, 1e-14}})), spd(MatrixXd::Identity(2, 2)),
                                             MatrixXd::Zero(2, 2)),
                  DomainError);
}

TEST_CASE("correlation round trip on random couplings") {
  std::mt19937_64 rng(37);
  for (Index d : {1, 2, 3, 5, 10}) {
    for (int t = 0; t < 20; ++t) {
      const SpdMatrix<double> a(random_spd(d, rng));
      const SpdMatrix<double> b(random_spd(d, rng));
      const MatrixXd r = random_correlation(d, rng);
      const auto x = coupling_from_correlation(a, b, CorrelationMatrix<double>(r));
      CHECK((correlation_factor(x).matrix() - r).norm() < 1e-12);
      CHECK((a.sqrt() * correlation_factor(x).matrix() * b.sqrt() - x.c()).norm() < 1e-12);
    }
  }
}

TEST_CASE("the comonotone coupling minimizes transport cost in 1-D") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> var(0.2, 5.0);
  std::uniform_real_distribution<double> rho(-0.999, 0.999);
  for (int t = 0; t < 10; ++t) {
    const SpdMatrix<double> a(scalar(var(rng)));
    const SpdMatrix<double> b(scalar(var(rng)));
    const double best = transport_cost(coupling_from_correlation(a, b, CorrelationMatrix<double>(scalar(1))));
    CHECK(best == doctest::Approx(bures_wasserstein_sq(a, b)).epsilon(1e-12));
    for (int k = 0; k < 200; ++k) {
      CHECK(best <= transport_cost(coupling_from_correlation(a, b, CorrelationMatrix<double>(scalar(rho(rng))))));
    }
  }
}
