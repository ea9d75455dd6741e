#pragma once

// Minimal deterministic SVG 1.1 output: line charts and contour panels.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace gausseot::cli {

struct Segment {
  double x0, y0, x1, y1;
};

/// Iso-line segments of f at `level`. f(i, j) is sampled at (xs[i], ys[j]);
/// saddle cells are resolved by the cell-center average.
std::vector<Segment> marching_squares(const Eigen::MatrixXd& f, const Eigen::VectorXd& xs,
                                      const Eigen::VectorXd& ys, double level);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string render_line_chart(const LineChart& chart);

struct ContourPanel {
  std::string title;
  Eigen::VectorXd xs;
  Eigen::VectorXd ys;
  Eigen::MatrixXd values;
  std::vector<double> levels;
};

std::string render_contour_panels(const std::string& title, const std::vector<ContourPanel>& panels);

std::string xml_escape(const std::string& s);

/// Round numbers spanning [lo, hi], about `count` of them.
std::vector<double> nice_ticks(double lo, double hi, int count);

}  // namespace gausseot::cli
