#include "vqrate/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "vqrate/errors.hpp"

namespace vqrate::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  const std::string buf(trim(field));
  if (buf.empty()) throw ParseError("csv: empty field on line " + std::to_string(line));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE)
    throw ParseError("csv: invalid number '" + buf + "' on line " + std::to_string(line));
  return v;
}

}  // namespace

Eigen::MatrixXd parse_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    while (true) {
      const auto comma = line.find(',');
      row.push_back(parse_number(line.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("csv: ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv: no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix(ss.str());
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("csv: cannot write '" + path + "'");
  write_matrix(out, m);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace vqrate::csv
