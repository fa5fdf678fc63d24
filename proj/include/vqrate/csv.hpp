#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>

namespace vqrate::csv {

// Numeric CSV, one row per point, no header. Blank lines are skipped.
Eigen::MatrixXd read_matrix(const std::string& path);
Eigen::MatrixXd parse_matrix(std::string_view text);
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Shortest round-trip form with 17 significant digits, '.' decimal separator.
std::string format_double(double v);
// RFC-4180 field quoting: quotes fields containing ',', '"', CR or LF.
std::string quote(std::string_view field);

}  // namespace vqrate::csv
