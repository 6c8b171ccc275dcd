#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "krrdd/numerics.hpp"

namespace krrdd::csv {

using Row = std::vector<std::string>;

/// 17 significant digits, enough to round-trip any double. NaN is written
/// as an empty field.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(const std::string& field);

void write_row(std::ostream& out, const Row& fields);

/// Parses RFC-4180 text. Accepts LF or CRLF line ends.
std::vector<Row> parse(std::istream& in);
std::vector<Row> read_file(const std::string& path);

double parse_double(const std::string& field);

/// Points and labels with header x0,...,x{d-1},y.
void write_points(const std::string& path, const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Vector>& y);
void read_points(const std::string& path, Matrix& x, Vector& y);

}  // namespace krrdd::csv
