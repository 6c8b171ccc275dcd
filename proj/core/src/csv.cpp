#include "krrdd/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "krrdd/error.hpp"

namespace krrdd::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(len)};
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const Row& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << "\r\n";
}

std::vector<Row> parse(std::istream& in) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw DataError("csv: stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::vector<Row> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse(in);
}

double parse_double(const std::string& field) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw DataError("csv: not a number: '" + field + "'");
  }
  return v;
}

void write_points(const std::string& path, const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Vector>& y) {
  if (y.size() != x.rows()) throw InvalidArgument("write_points: size mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  Row row;
  for (Index k = 0; k < x.cols(); ++k) row.push_back("x" + std::to_string(k));
  row.push_back("y");
  write_row(out, row);
  for (Index i = 0; i < x.rows(); ++i) {
    row.clear();
    for (Index k = 0; k < x.cols(); ++k) row.push_back(format_double(x(i, k)));
    row.push_back(format_double(y(i)));
    write_row(out, row);
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void read_points(const std::string& path, Matrix& x, Vector& y) {
  const auto rows = read_file(path);
  if (rows.empty()) throw DataError("'" + path + "': missing header");
  const Row& header = rows.front();
  if (header.size() < 2 || header.back() != "y") {
    throw DataError("'" + path + "': header must be x0,...,x{d-1},y");
  }
  for (std::size_t k = 0; k + 1 < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k)) {
      throw DataError("'" + path + "': unexpected column '" + header[k] + "'");
    }
  }
  const auto d = static_cast<Index>(header.size() - 1);
  const auto n = static_cast<Index>(rows.size() - 1);
  if (n < 1) throw DataError("'" + path + "': no data rows");
  x.resize(n, d);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i + 1)];
    if (static_cast<Index>(r.size()) != d + 1) {
      throw DataError("'" + path + "': row " + std::to_string(i + 1) + " has " +
                      std::to_string(r.size()) + " fields, expected " + std::to_string(d + 1));
    }
    for (Index k = 0; k < d; ++k) x(i, k) = parse_double(r[static_cast<std::size_t>(k)]);
    y(i) = parse_double(r.back());
  }
  if (!numerics::all_finite(x) || !y.allFinite()) throw DataError("'" + path + "': non-finite value");
}

}  // namespace krrdd::csv
