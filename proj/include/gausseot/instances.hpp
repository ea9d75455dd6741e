#pragma once

// Seeded random problem generators shared by tests, the acceptance run and the
// verify command. Same seed, same instances, on every platform.

#include <cstdint>
#include <random>
#include <vector>

#include "gausseot/closed_form.hpp"

namespace gausseot {

/// Spectrum in [min_eig, max_eig] under a Haar-random rotation.
Eigen::MatrixXd random_spd(Index d, std::mt19937_64& rng, double min_eig = 0.3,
                           double max_eig = 3.0);

/// Random matrix rescaled so its operator norm is max_norm * U(0, 1].
Eigen::MatrixXd random_correlation(Index d, std::mt19937_64& rng, double max_norm = 0.9);

ReferencePlan<double> random_reference(ReferenceKind kind, const SpdMatrix<double>& a,
                                       const SpdMatrix<double>& b, std::mt19937_64& rng);

struct ProblemSetOptions {
  std::vector<Index> dims{1, 2, 3, 5, 10};
  std::vector<ReferenceKind> kinds{ReferenceKind::Product, ReferenceKind::Correlation,
                                   ReferenceKind::Full};
  double eps_min = 0.05;
  double eps_max = 5.0;
  /// Instances with sigma_min(M) / sigma_max(M) at or below this are redrawn.
  double singular_ratio = 1e-6;
};

/// count problems cycling through dims and reference kinds; epsilon log-uniform.
std::vector<Problem<double>> seeded_problem_set(std::uint64_t seed, std::size_t count,
                                                const ProblemSetOptions& opts = {});

}  // namespace gausseot
