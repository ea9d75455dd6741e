#pragma once

// Entropic optimal transport between centered Gaussians N(A), N(B) with a
// Gaussian reference coupling N(Sigma):
//
//   W = min_pi  E_pi ||x - y||^2 + 2 eps KL(pi | N(Sigma)).
//
// The optimum is Gaussian with cross-covariance
//
//   C = [ (A M B M^T + eps^2/4 I)^{1/2} - eps/2 I ] M^{-T},   M = I - eps Gamma_12,
//
// where Gamma = Sigma^{-1}. Everything here is a pure function of a Problem.

#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "gausseot/gaussian.hpp"
#include "gausseot/linalg.hpp"

namespace gausseot {

/// sigma_min(M) / sigma_max(M) below this means M is treated as singular.
template <typename Scalar>
constexpr Scalar kSingularRatio = Scalar(1e-12);

/// Negative eigenvalues of the inner root argument above -this * scale are
/// round-off and get clamped to zero.
template <typename Scalar>
constexpr Scalar kRootClampTolerance = Scalar(1e-10);

// ---------------------------------------------------------------------------
// Reference plans

enum class ReferenceKind { Product, Correlation, Full };

inline const char* to_string(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::Product: return "product";
    case ReferenceKind::Correlation: return "correlation";
    case ReferenceKind::Full: return "full";
  }
  return "unknown";
}

struct ProductReference {};

template <typename Scalar>
struct CorrelationReference {
  CorrelationMatrix<Scalar> r;
};

template <typename Scalar>
struct FullReference {
  SpdMatrix<Scalar> sigma;
};

/// Reference coupling: an arbitrary PD Sigma, a coupling of the marginals
/// parametrized by a strict correlation R_ref, or the product measure (R_ref = 0).
template <typename Scalar>
class ReferencePlan {
 public:
  using Variant =
      std::variant<ProductReference, CorrelationReference<Scalar>, FullReference<Scalar>>;

  static ReferencePlan product() { return ReferencePlan(ProductReference{}); }

  static ReferencePlan correlation(CorrelationMatrix<Scalar> r) {
    if (!r.is_strict()) {
      throw DomainError("reference correlation must have operator norm < 1, got " +
                        detail::number_string(r.op_norm()));
    }
    return ReferencePlan(CorrelationReference<Scalar>{std::move(r)});
  }

  static ReferencePlan correlation(const MatrixX<Scalar>& r) {
    return correlation(CorrelationMatrix<Scalar>(r));
  }

  static ReferencePlan full(SpdMatrix<Scalar> sigma) {
    if (sigma.dim() % 2 != 0) {
      throw DomainError("full reference covariance must be 2d x 2d");
    }
    return ReferencePlan(FullReference<Scalar>{std::move(sigma)});
  }

  static ReferencePlan full(const MatrixX<Scalar>& sigma) {
    return full(SpdMatrix<Scalar>(sigma));
  }

  ReferenceKind kind() const {
    switch (v_.index()) {
      case 0: return ReferenceKind::Product;
      case 1: return ReferenceKind::Correlation;
      default: return ReferenceKind::Full;
    }
  }

  const Variant& variant() const { return v_; }

  /// R_ref for product (zero) and correlation plans.
  MatrixX<Scalar> correlation_matrix(Index d) const {
    if (const auto* c = std::get_if<CorrelationReference<Scalar>>(&v_)) return c->r.matrix();
    if (std::holds_alternative<ProductReference>(v_)) return MatrixX<Scalar>::Zero(d, d);
    throw DomainError("a full reference plan has no fixed correlation parametrization");
  }

 private:
  explicit ReferencePlan(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Sigma for the plan: pass-through, [[A, A^{1/2} R B^{1/2}], [., B]], or diag(A, B).
template <typename Scalar>
SpdMatrix<Scalar> materialize_sigma(const ReferencePlan<Scalar>& reference,
                                    const SpdMatrix<Scalar>& a, const SpdMatrix<Scalar>& b) {
  const Index d = a.dim();
  if (const auto* full = std::get_if<FullReference<Scalar>>(&reference.variant())) {
    if (full->sigma.dim() != 2 * d) {
      throw DomainError("full reference covariance must be " + detail::dims_string(2 * d, 2 * d));
    }
    return full->sigma;
  }
  MatrixX<Scalar> cross = MatrixX<Scalar>::Zero(d, d);
  if (const auto* corr = std::get_if<CorrelationReference<Scalar>>(&reference.variant())) {
    if (corr->r.dim() != d) throw DomainError("reference correlation dimension mismatch");
    if (!corr->r.is_strict()) {
      throw DomainError("reference correlation must have operator norm < 1");
    }
    cross = a.sqrt() * corr->r.matrix() * b.sqrt();
  }
  MatrixX<Scalar> sigma(2 * d, 2 * d);
  sigma << a.matrix(), cross, cross.transpose(), b.matrix();
  return SpdMatrix<Scalar>(sigma);
}

/// Blocks of Gamma = Sigma^{-1}.
template <typename Scalar>
struct GammaBlocks {
  MatrixX<Scalar> g11;
  MatrixX<Scalar> g22;
  MatrixX<Scalar> g12;

  MatrixX<Scalar> assemble() const {
    const Index d = g11.rows();
    MatrixX<Scalar> out(2 * d, 2 * d);
    out << g11, g12, g12.transpose(), g22;
    return out;
  }
};

template <typename Scalar>
GammaBlocks<Scalar> gamma_blocks(const SpdMatrix<Scalar>& sigma) {
  if (sigma.condition_number() > kMaxConditionNumber<Scalar>) {
    throw DomainError("reference covariance is near-singular: condition number " +
                      detail::number_string(sigma.condition_number()));
  }
  const BlockMatrix2x2<Scalar> inv =
      block_inverse(BlockMatrix2x2<Scalar>::from_matrix(sigma.matrix()));
  return GammaBlocks<Scalar>{inv.a11.matrix(), inv.a22.matrix(), inv.a12};
}

// ---------------------------------------------------------------------------
// Problem

template <typename Scalar>
class Problem {
 public:
  Problem(SpdMatrix<Scalar> a, SpdMatrix<Scalar> b, ReferencePlan<Scalar> reference,
          Scalar epsilon)
      : a_(std::move(a)), b_(std::move(b)), reference_(std::move(reference)), epsilon_(epsilon) {
    if (!(epsilon_ > Scalar(0)) || !std::isfinite(static_cast<double>(epsilon_))) {
      throw DomainError("epsilon must be a finite positive number");
    }
    if (a_.dim() != b_.dim()) {
      throw DomainError("marginal covariances differ in dimension: " + std::to_string(a_.dim()) +
                        " vs " + std::to_string(b_.dim()));
    }
    sigma_ = materialize_sigma(reference_, a_, b_);
    gamma_ = gamma_blocks(sigma_);
  }

  Index dim() const { return a_.dim(); }
  const SpdMatrix<Scalar>& a() const { return a_; }
  const SpdMatrix<Scalar>& b() const { return b_; }
  const ReferencePlan<Scalar>& reference() const { return reference_; }
  Scalar epsilon() const { return epsilon_; }
  const SpdMatrix<Scalar>& sigma() const { return sigma_; }
  const GammaBlocks<Scalar>& gamma() const { return gamma_; }

  /// max(1, ||A||, ||B||, eps): every residual threshold is relative to this.
  Scalar scale() const {
    return std::max({Scalar(1), a_.max_eigenvalue(), b_.max_eigenvalue(), epsilon_});
  }

 private:
  SpdMatrix<Scalar> a_;
  SpdMatrix<Scalar> b_;
  ReferencePlan<Scalar> reference_;
  Scalar epsilon_;
  SpdMatrix<Scalar> sigma_;
  GammaBlocks<Scalar> gamma_;
};

// ---------------------------------------------------------------------------
// M_eps and its invertibility

/// M = I - eps Gamma_12.
template <typename Scalar>
MatrixX<Scalar> m_eps(const Problem<Scalar>& problem) {
  return identity<Scalar>(problem.dim()) - problem.epsilon() * problem.gamma().g12;
}

/// M = I + eps A_ref^{-1} C_ref (B_ref - C_ref^T A_ref^{-1} C_ref)^{-1}, straight
/// from the blocks of Sigma without forming Sigma^{-1}.
template <typename Scalar>
MatrixX<Scalar> m_eps_from_reference_blocks(const Problem<Scalar>& problem) {
  const Index d = problem.dim();
  const MatrixX<Scalar>& sigma = problem.sigma().matrix();
  const MatrixX<Scalar> a_ref = sigma.topLeftCorner(d, d);
  const MatrixX<Scalar> b_ref = sigma.bottomRightCorner(d, d);
  const MatrixX<Scalar> c_ref = sigma.topRightCorner(d, d);
  const Eigen::LDLT<MatrixX<Scalar>> a_ldlt(a_ref);
  const MatrixX<Scalar> schur = b_ref - c_ref.transpose() * a_ldlt.solve(c_ref);
  const Eigen::LDLT<MatrixX<Scalar>> s_ldlt(schur);
  // A^{-1} C S^{-1} = (S^{-1} C^T A^{-1})^T
  const MatrixX<Scalar> right = s_ldlt.solve(MatrixX<Scalar>(a_ldlt.solve(c_ref).transpose()));
  return identity<Scalar>(d) + problem.epsilon() * right.transpose();
}

/// sigma_min(m) > tol * max(1, sigma_max(m)). M is dimensionless and tends to I
/// as eps -> 0, so the floor of 1 also catches a vanishing 1x1 M.
template <typename Scalar>
bool m_eps_invertible(const MatrixX<Scalar>& m, Scalar tol) {
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m);
  const VectorX<Scalar>& s = svd.singularValues();
  return s(s.size() - 1) > tol * std::max(Scalar(1), s(0));
}

/// Sufficient condition for M invertible:
///   eps * sum_i s_i / (1 - s_i^2) < sqrt(lambda_min(A_ref) lambda_min(B_ref)),
/// with s_i the singular values of R_ref = A_ref^{-1/2} C_ref B_ref^{-1/2}.
template <typename Scalar>
bool assumption_sufficient(const Problem<Scalar>& problem) {
  using std::sqrt;
  const Index d = problem.dim();
  const MatrixX<Scalar>& sigma = problem.sigma().matrix();
  const SpdMatrix<Scalar> a_ref(MatrixX<Scalar>(sigma.topLeftCorner(d, d)));
  const SpdMatrix<Scalar> b_ref(MatrixX<Scalar>(sigma.bottomRightCorner(d, d)));
  const MatrixX<Scalar> r_ref =
      a_ref.inv_sqrt() * sigma.topRightCorner(d, d) * b_ref.inv_sqrt();
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(r_ref);
  Scalar lhs = 0;
  for (Index i = 0; i < d; ++i) {
    const Scalar s = svd.singularValues()(i);
    if (!(s < Scalar(1))) {
      throw DomainError("reference correlation has a singular value >= 1: " +
                        detail::number_string(s));
    }
    lhs += s / (Scalar(1) - s * s);
  }
  lhs *= problem.epsilon();
  return lhs < sqrt(a_ref.min_eigenvalue() * b_ref.min_eigenvalue());
}

enum class AssumptionVerdict { SufficientConditionHolds, DirectCheckPasses, Fails };

inline const char* to_string(AssumptionVerdict v) {
  switch (v) {
    case AssumptionVerdict::SufficientConditionHolds: return "sufficient_condition_holds";
    case AssumptionVerdict::DirectCheckPasses: return "direct_check_passes";
    case AssumptionVerdict::Fails: return "fails";
  }
  return "unknown";
}

struct AssumptionStatus {
  bool sufficient_condition = false;
  bool direct_check = false;

  AssumptionVerdict verdict() const {
    if (sufficient_condition) return AssumptionVerdict::SufficientConditionHolds;
    if (direct_check) return AssumptionVerdict::DirectCheckPasses;
    return AssumptionVerdict::Fails;
  }
};

template <typename Scalar>
AssumptionStatus assumption_status(const Problem<Scalar>& problem) {
  AssumptionStatus status;
  status.sufficient_condition = assumption_sufficient(problem);
  status.direct_check = m_eps_invertible(m_eps(problem), kSingularRatio<Scalar>);
  return status;
}

// ---------------------------------------------------------------------------
// Primal objective and gradient

/// Value of the log-det barrier objective, or the boundary sentinel when X_C is
/// not PD (the objective is +infinity there).
template <typename Scalar>
class ObjectiveValue {
 public:
  static ObjectiveValue finite(Scalar v) { return ObjectiveValue(false, v); }
  static ObjectiveValue boundary() { return ObjectiveValue(true, Scalar(0)); }

  bool is_boundary() const { return boundary_; }
  bool is_finite() const { return !boundary_; }

  Scalar value() const {
    if (boundary_) throw DomainError("objective is +infinity on the PSD boundary");
    return value_;
  }

 private:
  ObjectiveValue(bool boundary, Scalar v) : boundary_(boundary), value_(v) {}
  bool boundary_;
  Scalar value_;
};

namespace detail {

template <typename Scalar>
void require_square(const MatrixX<Scalar>& c, Index d, const char* what) {
  if (c.rows() != d || c.cols() != d) {
    throw DomainError(std::string(what) + ": expected a " + dims_string(d, d) + " matrix, got " +
                      dims_string(c.rows(), c.cols()));
  }
}

/// S = B - C^T A^{-1} C with its eigendecomposition, or nothing if S is not PD.
template <typename Scalar>
struct SchurOfCoupling {
  SymMatrix<Scalar> s;
  SymEig<Scalar> eig;
  bool positive_definite;
};

template <typename Scalar>
SchurOfCoupling<Scalar> coupling_schur(const Problem<Scalar>& problem, const MatrixX<Scalar>& c) {
  const MatrixX<Scalar> a_inv = problem.a().inverse();
  MatrixX<Scalar> s = problem.b().matrix() - c.transpose() * a_inv * c;
  s = (s + s.transpose()) / Scalar(2);
  SchurOfCoupling<Scalar> out{SymMatrix<Scalar>(s), {}, false};
  out.eig = sym_eig(out.s);
  const Scalar s_min = out.eig.eigenvalues(out.eig.eigenvalues.size() - 1);
  out.positive_definite = s_min > kPdRelativeTolerance<Scalar> * problem.b().max_eigenvalue();
  return out;
}

}  // namespace detail

/// <Y + eps Sigma^{-1}, X_C>_HS - eps log det X_C,  Y = [[I, -I], [-I, I]].
template <typename Scalar>
ObjectiveValue<Scalar> primal_objective(const MatrixX<Scalar>& c, const Problem<Scalar>& problem) {
  using std::log;
  detail::require_square(c, problem.dim(), "primal_objective");
  if (!c.allFinite()) return ObjectiveValue<Scalar>::boundary();
  const auto schur = detail::coupling_schur(problem, c);
  if (!schur.positive_definite) return ObjectiveValue<Scalar>::boundary();

  const Scalar eps = problem.epsilon();
  const GammaBlocks<Scalar>& g = problem.gamma();
  const Scalar transport = problem.a().trace() + problem.b().trace() - Scalar(2) * c.trace();
  const Scalar reference = hs_inner(g.g11, problem.a().matrix()) +
                           hs_inner(g.g22, problem.b().matrix()) + Scalar(2) * hs_inner(g.g12, c);
  Scalar log_det_x = problem.a().log_det();
  for (Index i = 0; i < schur.eig.eigenvalues.size(); ++i) log_det_x += log(schur.eig.eigenvalues(i));
  return ObjectiveValue<Scalar>::finite(transport + eps * reference - eps * log_det_x);
}

/// 2 (eps A^{-1} C (B - C^T A^{-1} C)^{-1} - M).
template <typename Scalar>
MatrixX<Scalar> primal_gradient(const MatrixX<Scalar>& c, const Problem<Scalar>& problem) {
  detail::require_square(c, problem.dim(), "primal_gradient");
  const auto schur = detail::coupling_schur(problem, c);
  if (!schur.positive_definite) {
    throw DomainError("primal_gradient: Schur complement B - C^T A^{-1} C is not PD");
  }
  const MatrixX<Scalar> s_inv =
      spectral_apply(schur.eig, [](Scalar l) { return Scalar(1) / l; });
  return Scalar(2) * (problem.epsilon() * problem.a().inverse() * c * s_inv - m_eps(problem));
}

// ---------------------------------------------------------------------------
// Closed form

/// Root of a.M.b.M^T + eps^2/4 I through the symmetric argument
/// a^{1/2} M b M^T a^{1/2} + eps^2/4 I.
template <typename Scalar>
struct RegularizedRoot {
  VectorX<Scalar> eigenvalues;  // of the symmetric argument, clamped at zero
  MatrixX<Scalar> inner_root;   // symmetric
  MatrixX<Scalar> root;         // a^{1/2} inner_root a^{-1/2}
};

template <typename Scalar>
RegularizedRoot<Scalar> regularized_root(const SpdMatrix<Scalar>& left,
                                         const SpdMatrix<Scalar>& right, const MatrixX<Scalar>& m,
                                         Scalar eps, Scalar scale) {
  using std::sqrt;
  const Index d = left.dim();
  const MatrixX<Scalar> left_half = left.sqrt();
  const MatrixX<Scalar> n = left_half * m;
  MatrixX<Scalar> argument = n * right.matrix() * n.transpose();
  argument.diagonal().array() += eps * eps / Scalar(4);
  SymEig<Scalar> eig = sym_eig(SymMatrix<Scalar>(MatrixX<Scalar>((argument + argument.transpose()) / Scalar(2))));
  const Scalar smallest = eig.eigenvalues(d - 1);
  if (smallest < -kRootClampTolerance<Scalar> * scale) {
    throw NumericalFailure("regularized root argument is not PSD: smallest eigenvalue " +
                           detail::number_string(smallest));
  }
  eig.eigenvalues = eig.eigenvalues.cwiseMax(Scalar(0));
  RegularizedRoot<Scalar> out;
  out.eigenvalues = eig.eigenvalues;
  out.inner_root = spectral_apply(eig, [](Scalar l) { return sqrt(l); });
  out.root = left_half * out.inner_root * left.inv_sqrt();
  return out;
}

namespace detail {

/// M after the invertibility check, cross-checked against the second route in
/// debug builds.
template <typename Scalar>
MatrixX<Scalar> checked_m_eps(const Problem<Scalar>& problem) {
  MatrixX<Scalar> m = m_eps(problem);
#ifndef NDEBUG
  const MatrixX<Scalar> other = m_eps_from_reference_blocks(problem);
  if ((m - other).norm() > Scalar(1e-9) * std::max(Scalar(1), m.norm())) {
    throw NumericalFailure("M_eps routes disagree: " + number_string((m - other).norm()));
  }
#endif
  if (!m_eps_invertible(m, kSingularRatio<Scalar>)) {
    throw AssumptionViolated("M_eps = I - eps Gamma_12 is numerically singular (sigma_min / sigma_max = " +
                             number_string(smallest_singular_value(m) / operator_norm(m)) + ")");
  }
  return m;
}

/// X M^{-T}, via an LU solve on M.
template <typename Scalar>
MatrixX<Scalar> times_inverse_transpose(const MatrixX<Scalar>& x, const MatrixX<Scalar>& m) {
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(m);
  return lu.solve(MatrixX<Scalar>(x.transpose())).transpose();
}

template <typename Scalar>
Scalar cost_from_root(const Problem<Scalar>& problem, const RegularizedRoot<Scalar>& root) {
  using std::log;
  using std::sqrt;
  const Scalar eps = problem.epsilon();
  const Scalar d = static_cast<Scalar>(problem.dim());
  Scalar trace_root = 0;
  Scalar log_det_shifted = 0;
  for (Index i = 0; i < root.eigenvalues.size(); ++i) {
    const Scalar r = sqrt(root.eigenvalues(i));
    trace_root += r;
    log_det_shifted += log(r + eps / Scalar(2));
  }
  const GammaBlocks<Scalar>& g = problem.gamma();
  return problem.a().trace() + problem.b().trace() - Scalar(2) * trace_root +
         eps * log_det_shifted + eps * hs_inner(g.g11, problem.a().matrix()) +
         eps * hs_inner(g.g22, problem.b().matrix()) -
         eps * (problem.a().log_det() + problem.b().log_det()) - eps * d - eps * d * log(eps) +
         eps * problem.sigma().log_det();
}

}  // namespace detail

template <typename Scalar>
struct DualPotentials {
  SpdMatrix<Scalar> f;
  SpdMatrix<Scalar> g;
};

template <typename Scalar>
struct SolverIntermediates {
  MatrixX<Scalar> m_eps;        // I - eps Gamma_12
  MatrixX<Scalar> n;            // A^{1/2} M B^{1/2}
  MatrixX<Scalar> z;            // A F
  MatrixX<Scalar> w;            // C M^T
  SymMatrix<Scalar> schur;      // B - C^T A^{-1} C
  MatrixX<Scalar> ot_matrix_y;  // [[I, -I], [-I, I]]
};

template <typename Scalar>
struct Solution {
  MatrixX<Scalar> c_eps;
  CouplingCovariance<Scalar> coupling;
  Scalar cost;
  DualPotentials<Scalar> duals;
  /// ||grad I(C_eps)||_HS
  Scalar gradient_residual;
  /// cost - dual_value(F, G)
  Scalar duality_gap;
  /// A^{-1/2} C_eps B^{-1/2}
  MatrixX<Scalar> r_eps;
  SolverIntermediates<Scalar> intermediates;
  AssumptionStatus assumption;
};

/// F = A^{-1}(eps/2 I + (A M B M^T + eps^2/4 I)^{1/2}),
/// G = B^{-1}(eps/2 I + (B M^T A M + eps^2/4 I)^{1/2}).
template <typename Scalar>
DualPotentials<Scalar> dual_potentials(const Problem<Scalar>& problem) {
  const MatrixX<Scalar> m = detail::checked_m_eps(problem);
  const Scalar eps = problem.epsilon();
  const Index d = problem.dim();
  const auto f_root = regularized_root(problem.a(), problem.b(), m, eps, problem.scale());
  const auto g_root =
      regularized_root(problem.b(), problem.a(), MatrixX<Scalar>(m.transpose()), eps, problem.scale());
  const MatrixX<Scalar> half = (eps / Scalar(2)) * identity<Scalar>(d);
  const MatrixX<Scalar> a_ih = problem.a().inv_sqrt();
  const MatrixX<Scalar> b_ih = problem.b().inv_sqrt();
  return DualPotentials<Scalar>{SpdMatrix<Scalar>(MatrixX<Scalar>(a_ih * (f_root.inner_root + half) * a_ih)),
                                SpdMatrix<Scalar>(MatrixX<Scalar>(b_ih * (g_root.inner_root + half) * b_ih))};
}

/// <I + eps G11 - F, A> + <I + eps G22 - G, B> + eps log det [[F, -M], [-M^T, G]]
///   - eps log det(eps Sigma^{-1}).
template <typename Scalar>
Scalar dual_value(const SpdMatrix<Scalar>& f, const SpdMatrix<Scalar>& g,
                  const Problem<Scalar>& problem) {
  const Index d = problem.dim();
  if (f.dim() != d || g.dim() != d) throw DomainError("dual_value: dimension mismatch");
  const Scalar eps = problem.epsilon();
  const MatrixX<Scalar> m = m_eps(problem);
  const BlockMatrix2x2<Scalar> block(f.sym(), MatrixX<Scalar>(-m), g.sym());
  const SymMatrix<Scalar> schur = schur_complement(block);
  if (!is_positive_definite(schur)) {
    throw DomainError("dual_value: [[F, -M], [-M^T, G]] is not positive definite");
  }
  const Scalar log_det_block = f.log_det() + SpdMatrix<Scalar>(schur).log_det();
  const GammaBlocks<Scalar>& gamma = problem.gamma();
  const MatrixX<Scalar> id = identity<Scalar>(d);
  const Scalar linear = hs_inner(MatrixX<Scalar>(id + eps * gamma.g11 - f.matrix()), problem.a().matrix()) +
                        hs_inner(MatrixX<Scalar>(id + eps * gamma.g22 - g.matrix()), problem.b().matrix());
  using std::log;
  const Scalar log_det_eps_gamma = Scalar(2 * d) * log(eps) - problem.sigma().log_det();
  return linear + eps * log_det_block - eps * log_det_eps_gamma;
}

template <typename Scalar>
Scalar entropic_cost(const Problem<Scalar>& problem) {
  const MatrixX<Scalar> m = detail::checked_m_eps(problem);
  const auto root = regularized_root(problem.a(), problem.b(), m, problem.epsilon(), problem.scale());
  return detail::cost_from_root(problem, root);
}

namespace detail {

template <typename Scalar>
Solution<Scalar> assemble_solution(const Problem<Scalar>& problem, const MatrixX<Scalar>& m,
                                   const RegularizedRoot<Scalar>& root, MatrixX<Scalar> c,
                                   MatrixX<Scalar> r_eps) {
  const Index d = problem.dim();
  CouplingCovariance<Scalar> coupling = [&] {
    try {
      return CouplingCovariance<Scalar>(problem.a(), problem.b(), c);
    } catch (const DomainError& e) {
      throw NumericalFailure(std::string("closed-form coupling is not admissible: ") + e.what());
    }
  }();
  if (!coupling.is_nondegenerate()) {
    throw NumericalFailure("closed-form coupling is singular (correlation norm " +
                           number_string(coupling.correlation_norm()) + ")");
  }
  const Scalar cost = cost_from_root(problem, root);
  DualPotentials<Scalar> duals = dual_potentials(problem);
  const Scalar gap = cost - dual_value(duals.f, duals.g, problem);
  const Scalar grad_norm = primal_gradient(c, problem).norm();

  SolverIntermediates<Scalar> mid{
      m,
      MatrixX<Scalar>(problem.a().sqrt() * m * problem.b().sqrt()),
      MatrixX<Scalar>(problem.a().matrix() * duals.f.matrix()),
      MatrixX<Scalar>(c * m.transpose()),
      coupling_schur(problem, c).s,
      MatrixX<Scalar>(2 * d, 2 * d)};
  mid.ot_matrix_y << identity<Scalar>(d), -identity<Scalar>(d), -identity<Scalar>(d), identity<Scalar>(d);

  return Solution<Scalar>{std::move(c),        std::move(coupling), cost,
                          std::move(duals),    grad_norm,           gap,
                          std::move(r_eps),    std::move(mid),      assumption_status(problem)};
}

}  // namespace detail

/// General reference: C = [(A M B M^T + eps^2/4 I)^{1/2} - eps/2 I] M^{-T}.
template <typename Scalar>
Solution<Scalar> solve_closed_form(const Problem<Scalar>& problem) {
  const MatrixX<Scalar> m = detail::checked_m_eps(problem);
  const Scalar eps = problem.epsilon();
  const auto root = regularized_root(problem.a(), problem.b(), m, eps, problem.scale());
  MatrixX<Scalar> shifted = root.root;
  shifted.diagonal().array() -= eps / Scalar(2);
  MatrixX<Scalar> c = detail::times_inverse_transpose(shifted, m);
  MatrixX<Scalar> r_eps = problem.a().inv_sqrt() * c * problem.b().inv_sqrt();
  return detail::assemble_solution(problem, m, root, std::move(c), std::move(r_eps));
}

/// N = A^{1/2} B^{1/2} + eps R_ref (I - R_ref^T R_ref)^{-1}.
template <typename Scalar>
MatrixX<Scalar> correlation_n(const Problem<Scalar>& problem) {
  const Index d = problem.dim();
  const MatrixX<Scalar> r = problem.reference().correlation_matrix(d);
  const MatrixX<Scalar> gram = identity<Scalar>(d) - r.transpose() * r;
  const MatrixX<Scalar> right = Eigen::LDLT<MatrixX<Scalar>>(gram).solve(identity<Scalar>(d));
  return problem.a().sqrt() * problem.b().sqrt() + problem.epsilon() * r * right;
}

/// Reference coupling with the marginals of the problem:
///   C = A^{1/2} [ (N N^T + eps^2/4 I)^{1/2} - eps/2 I ] N^{-T} B^{1/2}.
template <typename Scalar>
Solution<Scalar> solve_correlation(const Problem<Scalar>& problem) {
  using std::sqrt;
  if (problem.reference().kind() == ReferenceKind::Full) {
    throw DomainError("solve_correlation needs a product or correlation reference");
  }
  const Scalar eps = problem.epsilon();
  const MatrixX<Scalar> m = detail::checked_m_eps(problem);
  const MatrixX<Scalar> n = correlation_n(problem);
  MatrixX<Scalar> argument = n * n.transpose();
  argument.diagonal().array() += eps * eps / Scalar(4);
  const SymEig<Scalar> eig = sym_eig(SymMatrix<Scalar>(MatrixX<Scalar>((argument + argument.transpose()) / Scalar(2))));
  MatrixX<Scalar> shifted =
      spectral_apply(eig, [](Scalar l) { return sqrt(std::max(l, Scalar(0))); });
  shifted.diagonal().array() -= eps / Scalar(2);
  MatrixX<Scalar> r_eps = detail::times_inverse_transpose(shifted, n);
  MatrixX<Scalar> c = problem.a().sqrt() * r_eps * problem.b().sqrt();

  const auto root = regularized_root(problem.a(), problem.b(), m, eps, problem.scale());
  return detail::assemble_solution(problem, m, root, std::move(c), std::move(r_eps));
}

// ---------------------------------------------------------------------------
// One dimension

template <typename Scalar>
struct Solution1D {
  Scalar c;
  Scalar cost;
};

/// Scalar closed form for mu = N(a^2), nu = N(b^2) and reference correlation rho.
template <typename Scalar>
Solution1D<Scalar> solve_1d(Scalar a_var, Scalar b_var, Scalar rho, Scalar eps) {
  using std::abs;
  using std::log;
  using std::sqrt;
  if (!(a_var > 0) || !(b_var > 0)) throw DomainError("solve_1d: variances must be positive");
  if (!(abs(rho) < 1)) throw DomainError("solve_1d: |rho| must be < 1");
  if (!(eps > 0)) throw DomainError("solve_1d: epsilon must be positive");
  const Scalar a = sqrt(a_var);
  const Scalar b = sqrt(b_var);
  const Scalar one_minus = Scalar(1) - rho * rho;
  const Scalar denom = a * b * one_minus + eps * rho;
  if (abs(denom) <= kSingularRatio<Scalar> * (a * b * one_minus + eps * abs(rho))) {
    throw AssumptionViolated("solve_1d: a b (1 - rho^2) + eps rho = 0, so M_eps = 0");
  }
  const Scalar k = a * b + eps * rho / one_minus;
  const Scalar s = sqrt(k * k + eps * eps / Scalar(4));
  Solution1D<Scalar> out;
  out.c = (s - eps / Scalar(2)) * a * b * one_minus / denom;
  out.cost = a_var + b_var - Scalar(2) * s + eps * log(s + eps / Scalar(2)) +
             Scalar(2) * eps / one_minus - eps - eps * log(eps) + eps * log(one_minus);
  return out;
}

}  // namespace gausseot
