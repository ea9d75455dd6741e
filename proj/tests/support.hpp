#pragma once

#include <Eigen/Dense>

#include <random>

#include "gausseot/closed_form.hpp"
#include "gausseot/instances.hpp"

namespace testing {

using Eigen::MatrixXd;
using gausseot::Index;

inline MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

inline gausseot::SpdMatrix<double> spd(const MatrixXd& m) { return gausseot::SpdMatrix<double>(m); }

inline gausseot::Problem<double> problem_1d(double a, double b, double rho, double eps) {
  return gausseot::Problem<double>(spd(scalar(a)), spd(scalar(b)),
                                   gausseot::ReferencePlan<double>::correlation(scalar(rho)), eps);
}

inline gausseot::Problem<double> product_problem(const MatrixXd& a, const MatrixXd& b, double eps) {
  return gausseot::Problem<double>(spd(a), spd(b), gausseot::ReferencePlan<double>::product(), eps);
}

inline double rel(const MatrixXd& x, const MatrixXd& y) {
  return (x - y).norm() / std::max(1.0, y.norm());
}

}  // namespace testing
