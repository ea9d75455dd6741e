#pragma once

// Centered Gaussian measures, couplings between them and the correlation
// parametrization C = A^{1/2} R B^{1/2} of admissible cross-covariances.

#include <cmath>
#include <string>

#include "gausseot/linalg.hpp"

namespace gausseot {

/// Couplings are admissible iff ||R||_op <= 1; this is the slack allowed above 1.
template <typename Scalar>
constexpr Scalar kCorrelationSlack = Scalar(1e-12);

/// Marginal covariances with a larger condition number are rejected when
/// factorizing a coupling.
template <typename Scalar>
constexpr Scalar kMaxConditionNumber = Scalar(1e12);

template <typename Scalar>
class GaussianMeasure {
 public:
  explicit GaussianMeasure(SpdMatrix<Scalar> covariance) : covariance_(std::move(covariance)) {}
  explicit GaussianMeasure(const MatrixX<Scalar>& covariance) : covariance_(covariance) {}

  Index dim() const { return covariance_.dim(); }
  const SpdMatrix<Scalar>& covariance() const { return covariance_; }

 private:
  SpdMatrix<Scalar> covariance_;
};

/// A d x d matrix with operator norm at most one (up to kCorrelationSlack).
template <typename Scalar>
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;

  explicit CorrelationMatrix(MatrixX<Scalar> r) : r_(std::move(r)) {
    if (r_.rows() != r_.cols() || r_.rows() < 1) {
      throw DomainError("correlation matrix must be square, got " +
                        detail::dims_string(r_.rows(), r_.cols()));
    }
    op_norm_ = operator_norm(r_);
    if (!(op_norm_ <= Scalar(1) + kCorrelationSlack<Scalar>)) {
      throw DomainError("correlation matrix has operator norm " +
                        detail::number_string(op_norm_) + " > 1");
    }
  }

  Index dim() const { return r_.rows(); }
  const MatrixX<Scalar>& matrix() const { return r_; }
  Scalar op_norm() const { return op_norm_; }
  /// Strictly inside the unit ball: the joint covariance it induces is PD.
  bool is_strict() const { return op_norm_ < Scalar(1); }

 private:
  MatrixX<Scalar> r_;
  Scalar op_norm_ = Scalar(0);
};

namespace detail {

template <typename Scalar>
void require_well_conditioned(const SpdMatrix<Scalar>& m, const char* name) {
  if (m.condition_number() > kMaxConditionNumber<Scalar>) {
    throw DomainError(std::string(name) + " is near-singular: condition number " +
                      number_string(m.condition_number()) + " > 1e12");
  }
}

/// a^{-1/2} c b^{-1/2} without any admissibility check.
template <typename Scalar>
MatrixX<Scalar> raw_correlation(const SpdMatrix<Scalar>& a, const SpdMatrix<Scalar>& b,
                                const MatrixX<Scalar>& c) {
  require_well_conditioned(a, "A");
  require_well_conditioned(b, "B");
  return a.inv_sqrt() * c * b.inv_sqrt();
}

}  // namespace detail

/// Joint covariance [[A, C], [C^T, B]] of a coupling between N(A) and N(B).
/// Construction checks PSD of the assembled matrix through ||A^{-1/2} C B^{-1/2}||_op <= 1.
template <typename Scalar>
class CouplingCovariance {
 public:
  CouplingCovariance(SpdMatrix<Scalar> a, SpdMatrix<Scalar> b, MatrixX<Scalar> c)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    const Index d = a_.dim();
    if (b_.dim() != d || c_.rows() != d || c_.cols() != d) {
      throw DomainError("coupling covariance: blocks must all be " + detail::dims_string(d, d));
    }
    correlation_norm_ = operator_norm(detail::raw_correlation(a_, b_, c_));
    if (!(correlation_norm_ <= Scalar(1) + kCorrelationSlack<Scalar>)) {
      throw DomainError("coupling covariance is not PSD: correlation operator norm " +
                        detail::number_string(correlation_norm_) + " > 1");
    }
  }

  Index dim() const { return a_.dim(); }
  const SpdMatrix<Scalar>& a() const { return a_; }
  const SpdMatrix<Scalar>& b() const { return b_; }
  const MatrixX<Scalar>& c() const { return c_; }
  Scalar correlation_norm() const { return correlation_norm_; }
  /// The joint covariance is PD (not just PSD).
  bool is_nondegenerate() const { return correlation_norm_ < Scalar(1); }

  MatrixX<Scalar> joint() const {
    const Index d = dim();
    MatrixX<Scalar> x(2 * d, 2 * d);
    x << a_.matrix(), c_, c_.transpose(), b_.matrix();
    return x;
  }

 private:
  SpdMatrix<Scalar> a_;
  SpdMatrix<Scalar> b_;
  MatrixX<Scalar> c_;
  Scalar correlation_norm_ = Scalar(0);
};

/// KL(p1 | p0) = 1/2 [ <S0^{-1}, S1 - S0> - log det(S0^{-1} S1) ].
template <typename Scalar>
Scalar kl_divergence(const GaussianMeasure<Scalar>& p1, const GaussianMeasure<Scalar>& p0) {
  if (p1.dim() != p0.dim()) {
    throw DomainError("kl_divergence: dimension mismatch");
  }
  const SpdMatrix<Scalar>& s1 = p1.covariance();
  const SpdMatrix<Scalar>& s0 = p0.covariance();
  const MatrixX<Scalar> s0_inv = s0.inverse();
  const Scalar inner = hs_inner(s0_inv, MatrixX<Scalar>(s1.matrix() - s0.matrix()));
  return Scalar(0.5) * (inner - s1.log_det() + s0.log_det());
}

/// tr a + tr b - 2 tr (a^{1/2} b a^{1/2})^{1/2}, clamped at zero.
template <typename Scalar>
Scalar bures_wasserstein_sq(const SpdMatrix<Scalar>& a, const SpdMatrix<Scalar>& b) {
  using std::sqrt;
  if (a.dim() != b.dim()) {
    throw DomainError("bures_wasserstein_sq: dimension mismatch");
  }
  const MatrixX<Scalar> a_half = a.sqrt();
  const SymEig<Scalar> inner =
      sym_eig(SymMatrix<Scalar>(MatrixX<Scalar>(a_half * b.matrix() * a_half)));
  Scalar root_trace = 0;
  for (Index i = 0; i < inner.eigenvalues.size(); ++i) {
    root_trace += sqrt(std::max(inner.eigenvalues(i), Scalar(0)));
  }
  return std::max(Scalar(0), a.trace() + b.trace() - Scalar(2) * root_trace);
}

/// E||X - Y||^2 = tr a + tr b - 2 tr c.
template <typename Scalar>
Scalar transport_cost(const CouplingCovariance<Scalar>& x) {
  return x.a().trace() + x.b().trace() - Scalar(2) * x.c().trace();
}

template <typename Scalar>
CorrelationMatrix<Scalar> correlation_factor(const CouplingCovariance<Scalar>& x) {
  return CorrelationMatrix<Scalar>(detail::raw_correlation(x.a(), x.b(), x.c()));
}

template <typename Scalar>
CouplingCovariance<Scalar> coupling_from_correlation(const SpdMatrix<Scalar>& a,
                                                     const SpdMatrix<Scalar>& b,
                                                     const CorrelationMatrix<Scalar>& r) {
  if (a.dim() != r.dim() || b.dim() != r.dim()) {
    throw DomainError("coupling_from_correlation: dimension mismatch");
  }
  return CouplingCovariance<Scalar>(a, b, MatrixX<Scalar>(a.sqrt() * r.matrix() * b.sqrt()));
}

}  // namespace gausseot
