#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gse::csv {

// Header-indexed table of string cells. Parsing follows RFC 4180: quoted
// fields may contain commas, doubled quotes, and line breaks.
class Table {
 public:
  Table() = default;
  Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Throws InputError when a required column is missing.
  std::size_t column(std::string_view name) const;

  const std::string& cell(std::size_t row, std::string_view column_name) const;
  double number(std::size_t row, std::string_view column_name) const;
  int integer(std::size_t row, std::string_view column_name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

Table parse(std::istream& in, std::string_view source = "<stream>");
Table read_file(const std::filesystem::path& path);

// Strict numeric parse of a whole cell (surrounding blanks allowed).
double parse_double(std::string_view s, std::string_view context = {});
int parse_int(std::string_view s, std::string_view context = {});

// Shortest representation that parses back to the same double.
std::string format_roundtrip(double v);
// Fixed-point with the given number of decimals; "-0.000" is normalized to "0.000".
std::string format_fixed(double v, int decimals);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace gse::csv
