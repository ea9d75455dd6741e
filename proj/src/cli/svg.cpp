#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cli/format.hpp"

namespace gausseot::cli {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string px(double v) { return format_fixed(v, 2); }

std::string tick_label(double v) {
  std::string s = format_fixed(v, 6);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int count) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, count);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

std::vector<Segment> marching_squares(const Eigen::MatrixXd& f, const Eigen::VectorXd& xs,
                                      const Eigen::VectorXd& ys, double level) {
  std::vector<Segment> out;
  const Eigen::Index nx = f.rows();
  const Eigen::Index ny = f.cols();
  const auto lerp = [level](double a, double b, double fa, double fb) {
    const double t = (level - fa) / (fb - fa);
    return a + t * (b - a);
  };
  for (Eigen::Index i = 0; i + 1 < nx; ++i) {
    for (Eigen::Index j = 0; j + 1 < ny; ++j) {
      // Corners counter-clockwise from bottom-left.
      const double v0 = f(i, j), v1 = f(i + 1, j), v2 = f(i + 1, j + 1), v3 = f(i, j + 1);
      const int code = (v0 >= level ? 1 : 0) | (v1 >= level ? 2 : 0) | (v2 >= level ? 4 : 0) |
                       (v3 >= level ? 8 : 0);
      if (code == 0 || code == 15) continue;
      const double x0 = xs(i), x1 = xs(i + 1), y0 = ys(j), y1 = ys(j + 1);
      // Edge crossings: bottom, right, top, left.
      const double bx = lerp(x0, x1, v0, v1);
      const double ry = lerp(y0, y1, v1, v2);
      const double tx = lerp(x0, x1, v3, v2);
      const double ly = lerp(y0, y1, v0, v3);
      const Segment bottom_right{bx, y0, x1, ry}, bottom_top{bx, y0, tx, y1},
          bottom_left{bx, y0, x0, ly}, right_top{x1, ry, tx, y1}, right_left{x1, ry, x0, ly},
          top_left{tx, y1, x0, ly};
      const bool center_high = (v0 + v1 + v2 + v3) / 4.0 >= level;
      switch (code) {
        case 1: case 14: out.push_back(bottom_left); break;
        case 2: case 13: out.push_back(bottom_right); break;
        case 3: case 12: out.push_back(right_left); break;
        case 4: case 11: out.push_back(right_top); break;
        case 6: case 9: out.push_back(bottom_top); break;
        case 7: case 8: out.push_back(top_left); break;
        case 5:
          if (center_high) {
            out.push_back(bottom_right);
            out.push_back(top_left);
          } else {
            out.push_back(bottom_left);
            out.push_back(right_top);
          }
          break;
        case 10:
          if (center_high) {
            out.push_back(bottom_left);
            out.push_back(right_top);
          } else {
            out.push_back(bottom_right);
            out.push_back(top_left);
          }
          break;
        default: break;
      }
    }
  }
  return out;
}

std::string render_line_chart(const LineChart& chart) {
  const double width = 720, height = 460;
  const double left = 70, right = 170, top = 50, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : chart.series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!(xmax > xmin)) xmax = xmin + 1;
  ymin = std::min(ymin, 0.0);
  if (!(ymax > ymin)) ymax = ymin + 1;
  ymax += 0.05 * (ymax - ymin);

  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << px(width)
     << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(width) << " " << px(height) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << px(width) << "\" height=\"" << px(height) << "\" fill=\"white\"/>\n"
     << "<text x=\"" << px(width / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">" << xml_escape(chart.title) << "</text>\n";

  os << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  for (double t : nice_ticks(xmin, xmax, 6)) {
    os << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(top) << "\" x2=\"" << px(sx(t)) << "\" y2=\""
       << px(top + ph) << "\" stroke=\"#e0e0e0\"/>\n"
       << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(top + ph + 16) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax, 6)) {
    os << "<line x1=\"" << px(left) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(left + pw) << "\" y2=\""
       << px(sy(t)) << "\" stroke=\"#e0e0e0\"/>\n"
       << "<text x=\"" << px(left - 6) << "\" y=\"" << px(sy(t) + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\""
     << px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(height - 18)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(chart.x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
        "transform=\"rotate(-90 18 " << px(top + ph / 2) << ")\">" << xml_escape(chart.y_label) << "</text>\n"
     << "</g>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const Series& s = chart.series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (!first) os << ' ';
      first = false;
      os << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
    }
    os << "\"/>\n";
    const double ly = top + 14 + 20 * static_cast<double>(k);
    os << "<line x1=\"" << px(left + pw + 12) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(left + pw + 36)
       << "\" y2=\"" << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << px(left + pw + 42) << "\" y=\"" << px(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_contour_panels(const std::string& title, const std::vector<ContourPanel>& panels) {
  const int columns = std::min<int>(3, std::max<int>(1, static_cast<int>(panels.size())));
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const double cell = 240, plot = 200, pad = 20, head = 50;
  const double width = columns * cell, height = head + rows * (cell + 10);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << px(width)
     << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(width) << " " << px(height) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << px(width) << "\" height=\"" << px(height) << "\" fill=\"white\"/>\n"
     << "<text x=\"" << px(width / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">" << xml_escape(title) << "</text>\n";

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const ContourPanel& p = panels[k];
    const double ox = (static_cast<double>(k % columns)) * cell + pad;
    const double oy = head + static_cast<double>(k / columns) * (cell + 10) + pad;
    const double xmin = p.xs(0), xmax = p.xs(p.xs.size() - 1);
    const double ymin = p.ys(0), ymax = p.ys(p.ys.size() - 1);
    const auto sx = [&](double x) { return ox + (x - xmin) / (xmax - xmin) * plot; };
    const auto sy = [&](double y) { return oy + plot - (y - ymin) / (ymax - ymin) * plot; };

    os << "<g>\n<rect x=\"" << px(ox) << "\" y=\"" << px(oy) << "\" width=\"" << px(plot)
       << "\" height=\"" << px(plot) << "\" fill=\"none\" stroke=\"black\"/>\n"
       << "<text x=\"" << px(ox + plot / 2) << "\" y=\"" << px(oy - 6)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(p.title)
       << "</text>\n";
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
      const std::vector<Segment> segs = marching_squares(p.values, p.xs, p.ys, p.levels[l]);
      if (segs.empty()) continue;
      // Darker for higher levels.
      const int shade = 200 - static_cast<int>(180.0 * (l + 1) / p.levels.size());
      os << "<path fill=\"none\" stroke=\"rgb(" << shade / 3 << "," << shade / 2 << "," << 255 - shade / 4
         << ")\" stroke-width=\"1\" d=\"";
      for (std::size_t s = 0; s < segs.size(); ++s) {
        if (s) os << ' ';
        os << 'M' << px(sx(segs[s].x0)) << ' ' << px(sy(segs[s].y0)) << 'L' << px(sx(segs[s].x1)) << ' '
           << px(sy(segs[s].y1));
      }
      os << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gausseot::cli
