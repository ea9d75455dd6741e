#pragma once

// Locale-independent number and document formatting for CLI output.

#include <Eigen/Dense>
#include <json.hpp>

#include <string>

namespace gausseot::cli {

using Json = nlohmann::ordered_json;

/// Shortest representation that round-trips to the same double.
std::string format_number(double v);

/// Fixed-point with the given decimals (SVG coordinates).
std::string format_fixed(double v, int decimals);

/// Row-major array of arrays.
Json matrix_to_json(const Eigen::MatrixXd& m);

/// JSON text with numbers written by format_number. Non-finite numbers become null.
std::string dump_json(const Json& doc, int indent = 2);

/// Quotes a CSV field only when it needs it.
std::string csv_field(const std::string& s);

}  // namespace gausseot::cli
