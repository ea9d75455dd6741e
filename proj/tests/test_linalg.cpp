#include <doctest.h>

#include "gausseot/linalg.hpp"
#include "support.hpp"

using namespace gausseot;
using namespace testing;

TEST_CASE("symmetric matrices are symmetrized and reject real asymmetry") {
  MatrixXd m = mat({{2, 1}, {1 + 1e-12, 3}});
  const SymMatrix<double> s(m);
  CHECK(s.matrix()(0, 1) == s.matrix()(1, 0));
  CHECK_THROWS_AS(SymMatrix<double>(mat({{2, 1}, {1.1, 3}})), DomainError);
  CHECK_THROWS_AS(SymMatrix<double>(MatrixXd(2, 3)), DomainError);
  CHECK_THROWS_AS(SymMatrix<double>(MatrixXd(0, 0)), DomainError);
  CHECK_THROWS_AS(SymMatrix<double>(mat({{NAN, 0}, {0, 1}})), DomainError);
}

TEST_CASE("sym_eig sorts descending and reconstructs") {
  const auto id = sym_eig(SymMatrix<double>(MatrixXd::Identity(3, 3)));
  CHECK(id.eigenvalues.isApprox(Eigen::Vector3d(1, 1, 1)));
  CHECK((id.eigenvectors.transpose() * id.eigenvectors - MatrixXd::Identity(3, 3)).norm() < 1e-14);

  const auto diag = sym_eig(SymMatrix<double>(mat({{1, 0}, {0, 4}})));
  CHECK(diag.eigenvalues(0) == doctest::Approx(4));
  CHECK(diag.eigenvalues(1) == doctest::Approx(1));
  CHECK(std::abs(diag.eigenvectors(1, 0)) == doctest::Approx(1));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const MatrixXd h = MatrixXd::Random(6, 6);
    const MatrixXd g = h + h.transpose();
    const auto e = sym_eig(SymMatrix<double>(g));
    const MatrixXd back = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
    CHECK((back - g).norm() < 1e-12 * g.norm());
    for (Index i = 1; i < 6; ++i) CHECK(e.eigenvalues(i - 1) >= e.eigenvalues(i));
  }
}

TEST_CASE("SpdMatrix rejects non-PD input with a domain error") {
  CHECK_THROWS_AS(SpdMatrix<double>(mat({{1, 2}, {2, 1}})), DomainError);
  CHECK_THROWS_AS(SpdMatrix<double>(mat({{1, 1}, {1, 1}})), DomainError);
  CHECK_THROWS_AS(SpdMatrix<double>(scalar(0)), DomainError);
  CHECK_NOTHROW(SpdMatrix<double>(scalar(1e-300)));
}

TEST_CASE("spd_sqrt") {
  CHECK(spd_sqrt(spd(MatrixXd::Identity(3, 3))).matrix().isApprox(MatrixXd::Identity(3, 3)));
  CHECK((spd_sqrt(spd(mat({{4, 0}, {0, 9}}))).matrix() - mat({{2, 0}, {0, 3}})).norm() < 1e-15);

  std::mt19937_64 rng(3);
  for (Index d : {1, 2, 3, 5, 10, 30}) {
    for (int k = 0; k < 10; ++k) {
      const MatrixXd m = random_spd(d, rng, 0.01, 100.0);
      const MatrixXd r = spd_sqrt(spd(m)).matrix();
      CHECK((r * r - m).norm() < 1e-10 * m.norm());
      CHECK(SymEig<double>(sym_eig(SymMatrix<double>(r))).eigenvalues.minCoeff() > 0);
    }
  }
}

TEST_CASE("spd_sqrt in long double") {
  using LMat = MatrixX<long double>;
  LMat m(2, 2);
  m << 5, 2, 2, 3;
  const SpdMatrix<long double> s(m);
  const LMat r = spd_sqrt(s).matrix();
  CHECK(static_cast<double>((r * r - m).norm()) < 1e-17);
  CHECK(static_cast<double>(s.log_det()) == doctest::Approx(std::log(11.0)).epsilon(1e-15));
}

TEST_CASE("log_det sums log-eigenvalues and survives huge scales") {
  CHECK(log_det(spd(mat({{2, 1}, {1, 2}}))) == doctest::Approx(std::log(3.0)));
  // det = 1e-400 underflows; the log does not.
  const MatrixXd tiny = 1e-100 * MatrixXd::Identity(4, 4);
  CHECK(log_det(spd(tiny)) == doctest::Approx(-400 * std::log(10.0)));
}

TEST_CASE("sqrt_product") {
  std::mt19937_64 rng(5);
  const MatrixXd k = random_spd(3, rng);
  CHECK(rel(sqrt_product(spd(MatrixXd::Identity(3, 3)), spd(k)), spd(k).sqrt()) < 1e-12);
  CHECK(sqrt_product(spd(scalar(4)), spd(scalar(9)))(0, 0) == doctest::Approx(6));
  CHECK_THROWS_AS(sqrt_product(spd(scalar(4)), spd(MatrixXd::Identity(2, 2))), DomainError);

  for (Index d : {1, 2, 3, 5, 10}) {
    for (int t = 0; t < 20; ++t) {
      const SpdMatrix<double> a(random_spd(d, rng));
      const SpdMatrix<double> b(random_spd(d, rng));
      const MatrixXd r = sqrt_product(a, b);
      const MatrixXd ab = a.matrix() * b.matrix();
      CHECK((r * r - ab).norm() < 1e-9 * ab.norm());
      // a^{-1/2} r a^{1/2} is the symmetric PSD root.
      const MatrixXd inner = a.inv_sqrt() * r * a.sqrt();
      CHECK((inner - inner.transpose()).norm() < 1e-10 * inner.norm());
      CHECK(sym_eig(SymMatrix<double>(MatrixXd((inner + inner.transpose()) / 2))).eigenvalues.minCoeff() > 0);
    }
  }
}

TEST_CASE("schur_complement") {
  const BlockMatrix2x2<double> decoupled(SymMatrix<double>(mat({{2, 0}, {0, 3}})), MatrixXd::Zero(2, 2),
                                         SymMatrix<double>(mat({{5, 1}, {1, 4}})));
  CHECK(schur_complement(decoupled).matrix() == mat({{5, 1}, {1, 4}}));

  const auto x = BlockMatrix2x2<double>::from_matrix(mat({{1, 0.5}, {0.5, 1}}));
  CHECK(schur_complement(x).matrix()(0, 0) == doctest::Approx(0.75));

  std::mt19937_64 rng(9);
  for (Index d : {1, 2, 4}) {
    const SpdMatrix<double> a(random_spd(d, rng));
    const SpdMatrix<double> b(random_spd(d, rng));
    const MatrixXd r = random_correlation(d, rng);
    const BlockMatrix2x2<double> xr(a.sym(), MatrixXd(a.sqrt() * r * b.sqrt()), b.sym());
    const MatrixXd expected =
        b.sqrt() * (MatrixXd::Identity(d, d) - r.transpose() * r) * b.sqrt();
    CHECK((schur_complement(xr).matrix() - expected).norm() < 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("block_inverse") {
  const BlockMatrix2x2<double> decoupled(SymMatrix<double>(mat({{2, 0}, {0, 4}})), MatrixXd::Zero(2, 2),
                                         SymMatrix<double>(mat({{5, 0}, {0, 10}})));
  const auto inv = block_inverse(decoupled);
  CHECK(inv.a12.norm() == 0);
  CHECK((inv.a11.matrix() - mat({{0.5, 0}, {0, 0.25}})).norm() < 1e-15);
  CHECK((inv.a22.matrix() - mat({{0.2, 0}, {0, 0.1}})).norm() < 1e-15);

  const auto inv1 = block_inverse(BlockMatrix2x2<double>::from_matrix(mat({{1, 0.5}, {0.5, 1}})));
  CHECK(inv1.a12(0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
  CHECK(inv1.a11.matrix()(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(inv1.a22.matrix()(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(block_inverse(BlockMatrix2x2<double>::from_matrix(mat({{1, 1}, {1, 1}}))), DomainError);

  std::mt19937_64 rng(21);
  for (Index d : {1, 2, 3, 5, 10}) {
    for (int t = 0; t < 20; ++t) {
      const SpdMatrix<double> a(random_spd(d, rng));
      const SpdMatrix<double> b(random_spd(d, rng));
      const MatrixXd c = a.sqrt() * random_correlation(d, rng) * b.sqrt();
      const BlockMatrix2x2<double> x(a.sym(), c, b.sym());
      const MatrixXd prod = x.assemble() * block_inverse(x).assemble();
      CHECK((prod - MatrixXd::Identity(2 * d, 2 * d)).norm() < 1e-10);
    }
  }
}

TEST_CASE("is_positive_definite") {
  CHECK(is_positive_definite(SymMatrix<double>(MatrixXd::Identity(3, 3))));
  CHECK(is_positive_definite(SymMatrix<double>(MatrixXd::Identity(3, 3)), 0.5));
  CHECK_FALSE(is_positive_definite(SymMatrix<double>(MatrixXd::Identity(3, 3)), 1.0));
  CHECK_FALSE(is_positive_definite(BlockMatrix2x2<double>::from_matrix(mat({{1, 1}, {1, 1}}))));

  const MatrixXd id = MatrixXd::Identity(2, 2);
  const MatrixXd r = mat({{0.999, 0}, {0, 0.3}});
  CHECK(is_positive_definite(BlockMatrix2x2<double>(SymMatrix<double>(id), r, SymMatrix<double>(id))));
  const MatrixXd r_bad = mat({{1.001, 0}, {0, 0.3}});
  CHECK_FALSE(is_positive_definite(BlockMatrix2x2<double>(SymMatrix<double>(id), r_bad, SymMatrix<double>(id))));
}

TEST_CASE("block definiteness agrees with the full eigenvalue test on 1000 seeded instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  const Index dims[] = {1, 2, 3, 5, 10};
  int positives = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index d = dims[t % 5];
    const SpdMatrix<double> a(random_spd(d, rng));
    const SpdMatrix<double> b(random_spd(d, rng));
    // Operator norm of the correlation straddles 1.
    MatrixXd r = random_correlation(d, rng);
    r *= scale(rng) / operator_norm(r);
    const BlockMatrix2x2<double> x(a.sym(), MatrixXd(a.sqrt() * r * b.sqrt()), b.sym());
    const bool block = is_positive_definite(x);
    const bool full = is_positive_definite(SymMatrix<double>(x.assemble()));
    CHECK(block == full);
    positives += block;
  }
  CHECK(positives > 100);
  CHECK(positives < 900);
}

TEST_CASE("operator_norm and smallest singular value") {
  CHECK(operator_norm(MatrixXd::Zero(3, 3)) == 0);
  CHECK(operator_norm(mat({{3, 0}, {0, -5}})) == doctest::Approx(5));
  CHECK(smallest_singular_value(mat({{3, 0}, {0, -5}})) == doctest::Approx(3));
  for (int t = 0; t < 20; ++t) {
    const MatrixXd m = MatrixXd::Random(4, 4);
    const MatrixXd mtm = m.transpose() * m;
    const double expected = std::sqrt(sym_eig(SymMatrix<double>(mtm)).eigenvalues(0));
    CHECK(std::abs(operator_norm(m) - expected) < 1e-10 * expected);
  }
}

TEST_CASE("hs_inner") {
  CHECK(hs_inner(mat({{1, 2}, {3, 4}}), mat({{1, 0}, {0, 1}})) == 5);
  CHECK(hs_inner(mat({{1, 2}, {3, 4}}), mat({{0, 1}, {0, 0}})) == 2);
}
