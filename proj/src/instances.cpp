#include "gausseot/instances.hpp"

#include <cmath>
#include <string>

namespace gausseot {

namespace {

// std::normal_distribution is implementation-defined; Box-Muller on top of the
// raw engine keeps instances identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian(rng);
  return m;
}

Eigen::MatrixXd random_rotation(Index d, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix so the distribution is Haar.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

}  // namespace

Eigen::MatrixXd random_spd(Index d, std::mt19937_64& rng, double min_eig, double max_eig) {
  if (d < 1 || !(min_eig > 0) || !(max_eig >= min_eig)) {
    throw ValidationError("random_spd", "need d >= 1 and 0 < min_eig <= max_eig");
  }
  const Eigen::MatrixXd q = random_rotation(d, rng);
  Eigen::VectorXd lambda(d);
  for (Index i = 0; i < d; ++i) lambda(i) = min_eig + (max_eig - min_eig) * uniform01(rng);
  Eigen::MatrixXd m = q * lambda.asDiagonal() * q.transpose();
  return (m + m.transpose()) / 2.0;
}

Eigen::MatrixXd random_correlation(Index d, std::mt19937_64& rng, double max_norm) {
  if (d < 1 || !(max_norm > 0 && max_norm < 1)) {
    throw ValidationError("random_correlation", "need d >= 1 and max_norm in (0, 1)");
  }
  const Eigen::MatrixXd g = gaussian_matrix(d, d, rng);
  const double target = max_norm * uniform01(rng);
  return g * (target / operator_norm(g));
}

ReferencePlan<double> random_reference(ReferenceKind kind, const SpdMatrix<double>& a,
                                       const SpdMatrix<double>& b, std::mt19937_64& rng) {
  const Index d = a.dim();
  if (b.dim() != d) throw DomainError("random_reference: marginals differ in dimension");
  switch (kind) {
    case ReferenceKind::Product:
      return ReferencePlan<double>::product();
    case ReferenceKind::Correlation:
      return ReferencePlan<double>::correlation(random_correlation(d, rng));
    case ReferenceKind::Full: {
      // Marginals of the reference differ from A and B.
      const SpdMatrix<double> a_ref(random_spd(d, rng));
      const SpdMatrix<double> b_ref(random_spd(d, rng));
      const Eigen::MatrixXd r = random_correlation(d, rng);
      const Eigen::MatrixXd cross = a_ref.sqrt() * r * b_ref.sqrt();
      Eigen::MatrixXd sigma(2 * d, 2 * d);
      sigma << a_ref.matrix(), cross, cross.transpose(), b_ref.matrix();
      return ReferencePlan<double>::full(sigma);
    }
  }
  throw ValidationError("reference", "unknown kind");
}

std::vector<Problem<double>> seeded_problem_set(std::uint64_t seed, std::size_t count,
                                                const ProblemSetOptions& opts) {
  if (opts.dims.empty() || opts.kinds.empty()) {
    throw ValidationError("problem_set", "dims and kinds must be non-empty");
  }
  if (!(opts.eps_min > 0) || !(opts.eps_max >= opts.eps_min)) {
    throw ValidationError("problem_set", "need 0 < eps_min <= eps_max");
  }
  std::mt19937_64 rng(seed);
  std::vector<Problem<double>> out;
  out.reserve(count);
  const double log_lo = std::log(opts.eps_min);
  const double log_hi = std::log(opts.eps_max);
  for (std::size_t k = 0; k < count; ++k) {
    const Index d = opts.dims[k % opts.dims.size()];
    const ReferenceKind kind = opts.kinds[(k / opts.dims.size()) % opts.kinds.size()];
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw NumericalFailure("seeded_problem_set: no admissible instance after 1000 draws");
      }
      const SpdMatrix<double> a(random_spd(d, rng));
      const SpdMatrix<double> b(random_spd(d, rng));
      ReferencePlan<double> ref = random_reference(kind, a, b, rng);
      const double eps = std::exp(log_lo + (log_hi - log_lo) * uniform01(rng));
      Problem<double> p(a, b, std::move(ref), eps);
      if (m_eps_invertible(m_eps(p), opts.singular_ratio)) {
        out.push_back(std::move(p));
        break;
      }
    }
  }
  return out;
}

}  // namespace gausseot
