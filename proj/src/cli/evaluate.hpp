#pragma once

// One row of a parameter study: cost, Bures-Wasserstein cost and bias at a
// single (epsilon, rho) point. Shared by the sweep and plot commands so both
// emit identical numbers.

#include <optional>
#include <string>
#include <vector>

#include "cli/problem_spec.hpp"

namespace gausseot::cli {

struct SweepRow {
  double epsilon = 0;
  std::optional<double> rho;  // only for 1-D product/correlation references
  double cost = 0;
  double bw_cost = 0;
  double bias = 0;
  Eigen::MatrixXd c;
  std::string status = "ok";
};

/// epsilon == 0 is the unregularized limit: c = sqrt_product(A, B), bias 0.
/// A rho value replaces the base reference with the 1-D correlation [[rho]].
/// Assumption and numerical failures become status rows.
SweepRow evaluate_point(const ProblemSpec& base, double epsilon, std::optional<double> rho);

/// Rows in input order; points are evaluated on a thread pool.
std::vector<SweepRow> evaluate_sweep(const SweepSpec& spec);

std::vector<std::string> sweep_header(Index d);
std::vector<std::string> sweep_cells(const SweepRow& row, Index d);

/// Header plus rows; an optional leading column carries a curve label per row.
std::string sweep_csv(const std::vector<SweepRow>& rows, Index d,
                      const std::vector<std::string>* curves = nullptr);

Json sweep_json(const std::vector<SweepRow>& rows);

}  // namespace gausseot::cli
