#pragma once

// Dense symmetric / SPD primitives. Every square root, inverse and
// log-determinant in the library goes through one symmetric eigensolve.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "gausseot/errors.hpp"

namespace gausseot {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Relative threshold: a symmetric matrix is PD when min eig > this * max |eig|.
template <typename Scalar>
constexpr Scalar kPdRelativeTolerance = Scalar(1e-12);

/// Inputs whose asymmetry exceeds this fraction of their norm are rejected.
template <typename Scalar>
constexpr Scalar kAsymmetryTolerance = Scalar(1e-8);

namespace detail {

inline std::string dims_string(Index rows, Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

template <typename Scalar>
std::string number_string(Scalar value) {
  std::ostringstream os;
  os.precision(6);
  os << static_cast<long double>(value);
  return os.str();
}

}  // namespace detail

/// Symmetric matrix, symmetrized on construction as (M + M^T) / 2.
template <typename Scalar>
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const MatrixX<Scalar>& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw DomainError("symmetric matrix must be square and non-empty, got " +
                        detail::dims_string(m.rows(), m.cols()));
    }
    if (!m.allFinite()) {
      throw DomainError("symmetric matrix has non-finite entries");
    }
    const Scalar asym = (m - m.transpose()).norm();
    const Scalar scale = m.norm();
    if (asym > kAsymmetryTolerance<Scalar> * scale) {
      throw DomainError("matrix is not symmetric: ||M - M^T|| = " +
                        detail::number_string(asym) + " exceeds 1e-8 * ||M||");
    }
    m_ = (m + m.transpose()) / Scalar(2);
  }

  Index dim() const { return m_.rows(); }
  const MatrixX<Scalar>& matrix() const { return m_; }
  operator const MatrixX<Scalar>&() const { return m_; }

 private:
  MatrixX<Scalar> m_;
};

template <typename Scalar>
struct SymEig {
  VectorX<Scalar> eigenvalues;   // descending
  MatrixX<Scalar> eigenvectors;  // orthonormal columns, matching order
};

template <typename Scalar>
SymEig<Scalar> sym_eig(const SymMatrix<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge");
  }
  // Eigen sorts ascending.
  SymEig<Scalar> out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// V * diag(f(lambda)) * V^T for a symmetric eigendecomposition.
template <typename Scalar, typename Fn>
MatrixX<Scalar> spectral_apply(const SymEig<Scalar>& eig, Fn&& fn) {
  VectorX<Scalar> mapped = eig.eigenvalues.unaryExpr(fn);
  MatrixX<Scalar> out =
      eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.transpose();
  return (out + out.transpose()) / Scalar(2);
}

/// Symmetric positive-definite matrix with its eigendecomposition cached
/// eagerly, so every derived quantity is a cheap spectral map.
template <typename Scalar>
class SpdMatrix {
 public:
  SpdMatrix() = default;

  explicit SpdMatrix(const MatrixX<Scalar>& m) : SpdMatrix(SymMatrix<Scalar>(m)) {}

  explicit SpdMatrix(SymMatrix<Scalar> base) : base_(std::move(base)), eig_(sym_eig(base_)) {
    const Scalar largest = eig_.eigenvalues.cwiseAbs().maxCoeff();
    const Scalar smallest = eig_.eigenvalues(eig_.eigenvalues.size() - 1);
    if (!(smallest > kPdRelativeTolerance<Scalar> * largest)) {
      throw DomainError("matrix is not positive definite: smallest eigenvalue " +
                        detail::number_string(smallest) + ", largest " +
                        detail::number_string(largest));
    }
  }

  Index dim() const { return base_.dim(); }
  const MatrixX<Scalar>& matrix() const { return base_.matrix(); }
  const SymMatrix<Scalar>& sym() const { return base_; }
  operator const MatrixX<Scalar>&() const { return base_.matrix(); }

  const SymEig<Scalar>& eig() const { return eig_; }
  const VectorX<Scalar>& eigenvalues() const { return eig_.eigenvalues; }
  Scalar min_eigenvalue() const { return eig_.eigenvalues(eig_.eigenvalues.size() - 1); }
  Scalar max_eigenvalue() const { return eig_.eigenvalues(0); }
  Scalar condition_number() const { return max_eigenvalue() / min_eigenvalue(); }

  /// M^p through the cached spectrum.
  MatrixX<Scalar> power(Scalar p) const {
    using std::pow;
    return spectral_apply(eig_, [p](Scalar l) { return pow(l, p); });
  }

  MatrixX<Scalar> sqrt() const {
    using std::sqrt;
    return spectral_apply(eig_, [](Scalar l) { return sqrt(l); });
  }

  MatrixX<Scalar> inv_sqrt() const {
    using std::sqrt;
    return spectral_apply(eig_, [](Scalar l) { return Scalar(1) / sqrt(l); });
  }

  MatrixX<Scalar> inverse() const {
    return spectral_apply(eig_, [](Scalar l) { return Scalar(1) / l; });
  }

  /// Sum of log-eigenvalues; never forms the determinant.
  Scalar log_det() const {
    using std::log;
    return eig_.eigenvalues.unaryExpr([](Scalar l) { return log(l); }).sum();
  }

  Scalar trace() const { return eig_.eigenvalues.sum(); }

 private:
  SymMatrix<Scalar> base_;
  SymEig<Scalar> eig_;
};

template <typename Scalar>
SpdMatrix<Scalar> spd_sqrt(const SpdMatrix<Scalar>& m) {
  return SpdMatrix<Scalar>(m.sqrt());
}

template <typename Scalar>
Scalar log_det(const SpdMatrix<Scalar>& m) {
  return m.log_det();
}

/// Non-symmetric root a^{1/2} (a^{1/2} k a^{1/2})^{1/2} a^{-1/2}: the root of a*k
/// whose spectrum is nonnegative.
template <typename Scalar>
MatrixX<Scalar> sqrt_product(const SpdMatrix<Scalar>& a, const SpdMatrix<Scalar>& k) {
  if (a.dim() != k.dim()) {
    throw DomainError("sqrt_product: dimension mismatch " +
                      std::to_string(a.dim()) + " vs " + std::to_string(k.dim()));
  }
  const MatrixX<Scalar> a_half = a.sqrt();
  const SpdMatrix<Scalar> inner(MatrixX<Scalar>(a_half * k.matrix() * a_half));
  return a_half * inner.sqrt() * a.inv_sqrt();
}

/// Largest singular value.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m.eval());
  return svd.singularValues()(0);
}

template <typename Derived>
typename Derived::Scalar smallest_singular_value(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m.eval());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Symmetric 2x2 block matrix [[a11, a12], [a12^T, a22]] with d x d blocks.
template <typename Scalar>
struct BlockMatrix2x2 {
  SymMatrix<Scalar> a11;
  SymMatrix<Scalar> a22;
  MatrixX<Scalar> a12;

  BlockMatrix2x2() = default;

  BlockMatrix2x2(SymMatrix<Scalar> top_left, MatrixX<Scalar> off_diagonal,
                 SymMatrix<Scalar> bottom_right)
      : a11(std::move(top_left)), a22(std::move(bottom_right)), a12(std::move(off_diagonal)) {
    const Index d = a11.dim();
    if (a22.dim() != d || a12.rows() != d || a12.cols() != d) {
      throw DomainError("block matrix: all blocks must be " + detail::dims_string(d, d));
    }
  }

  /// Splits a symmetric 2d x 2d matrix into its four d x d blocks.
  static BlockMatrix2x2 from_matrix(const MatrixX<Scalar>& m) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0) {
      throw DomainError("block matrix: expected an even square matrix, got " +
                        detail::dims_string(m.rows(), m.cols()));
    }
    const SymMatrix<Scalar> whole(m);
    const Index d = m.rows() / 2;
    const MatrixX<Scalar>& s = whole.matrix();
    return BlockMatrix2x2(SymMatrix<Scalar>(s.topLeftCorner(d, d)), s.topRightCorner(d, d),
                          SymMatrix<Scalar>(s.bottomRightCorner(d, d)));
  }

  Index dim() const { return a11.dim(); }

  MatrixX<Scalar> assemble() const {
    const Index d = dim();
    MatrixX<Scalar> out(2 * d, 2 * d);
    out.topLeftCorner(d, d) = a11.matrix();
    out.topRightCorner(d, d) = a12;
    out.bottomLeftCorner(d, d) = a12.transpose();
    out.bottomRightCorner(d, d) = a22.matrix();
    return out;
  }
};

/// S = a22 - a12^T a11^{-1} a12, symmetrized. a11 must be PD.
template <typename Scalar>
SymMatrix<Scalar> schur_complement(const BlockMatrix2x2<Scalar>& x) {
  const SpdMatrix<Scalar> top_left(x.a11);
  const MatrixX<Scalar> inv_a12 = top_left.inverse() * x.a12;
  MatrixX<Scalar> s = x.a22.matrix() - x.a12.transpose() * inv_a12;
  return SymMatrix<Scalar>(MatrixX<Scalar>((s + s.transpose()) / Scalar(2)));
}

/// Blockwise inverse via the Schur complement S of a11.
template <typename Scalar>
BlockMatrix2x2<Scalar> block_inverse(const BlockMatrix2x2<Scalar>& x) {
  const SpdMatrix<Scalar> top_left(x.a11);
  const SymMatrix<Scalar> schur = schur_complement(x);
  const SymEig<Scalar> schur_eig = sym_eig(schur);
  const Scalar s_min = schur_eig.eigenvalues(schur_eig.eigenvalues.size() - 1);
  const Scalar s_max = schur_eig.eigenvalues.cwiseAbs().maxCoeff();
  if (!(s_min > kPdRelativeTolerance<Scalar> * s_max)) {
    throw DomainError("block_inverse: Schur complement is singular, smallest eigenvalue " +
                      detail::number_string(s_min));
  }
  const MatrixX<Scalar> a11_inv = top_left.inverse();
  const MatrixX<Scalar> s_inv = spectral_apply(schur_eig, [](Scalar l) { return Scalar(1) / l; });
  const MatrixX<Scalar> a11_inv_a12 = a11_inv * x.a12;
  const MatrixX<Scalar> off = -a11_inv_a12 * s_inv;
  MatrixX<Scalar> top = a11_inv + a11_inv_a12 * s_inv * a11_inv_a12.transpose();
  top = (top + top.transpose()) / Scalar(2);
  return BlockMatrix2x2<Scalar>(SymMatrix<Scalar>(top), off, SymMatrix<Scalar>(s_inv));
}

template <typename Scalar>
Scalar min_eigenvalue(const SymMatrix<Scalar>& m) {
  const SymEig<Scalar> eig = sym_eig(m);
  return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

/// True iff the smallest eigenvalue exceeds tol.
template <typename Scalar>
bool is_positive_definite(const SymMatrix<Scalar>& m, Scalar tol) {
  return min_eigenvalue(m) > tol;
}

/// Relative-tolerance form: min eig > 1e-12 * max |eig|.
template <typename Scalar>
bool is_positive_definite(const SymMatrix<Scalar>& m) {
  const SymEig<Scalar> eig = sym_eig(m);
  const Scalar largest = eig.eigenvalues.cwiseAbs().maxCoeff();
  return eig.eigenvalues(eig.eigenvalues.size() - 1) > kPdRelativeTolerance<Scalar> * largest;
}

/// Block criterion: a11 PD and a22 - a12^T a11^{-1} a12 PD.
template <typename Scalar>
bool is_positive_definite(const BlockMatrix2x2<Scalar>& x, Scalar tol) {
  if (!is_positive_definite(x.a11, tol)) return false;
  return is_positive_definite(schur_complement(x), tol);
}

template <typename Scalar>
bool is_positive_definite(const BlockMatrix2x2<Scalar>& x) {
  if (!is_positive_definite(x.a11)) return false;
  return is_positive_definite(schur_complement(x));
}

/// Hilbert-Schmidt inner product tr(X Y^T).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hs_inner(const Eigen::MatrixBase<DerivedA>& x,
                                   const Eigen::MatrixBase<DerivedB>& y) {
  return x.cwiseProduct(y).sum();
}

template <typename Scalar>
MatrixX<Scalar> identity(Index d) {
  return MatrixX<Scalar>::Identity(d, d);
}

}  // namespace gausseot
