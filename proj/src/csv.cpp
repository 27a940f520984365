#include "gse/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gse/error.hpp"

namespace gse::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool needs_quotes(const std::string& f) {
  return f.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

Table::Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)), rows_(std::move(rows)) {}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw InputError("missing CSV column '" + std::string(name) + "'");
}

const std::string& Table::cell(std::size_t row, std::string_view column_name) const {
  return rows_.at(row).at(column(column_name));
}

double Table::number(std::size_t row, std::string_view column_name) const {
  return parse_double(cell(row, column_name),
                      "row " + std::to_string(row + 1) + ", column " + std::string(column_name));
}

int Table::integer(std::size_t row, std::string_view column_name) const {
  return parse_int(cell(row, column_name),
                   "row " + std::to_string(row + 1) + ", column " + std::string(column_name));
}

Table parse(std::istream& in, std::string_view source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c = 0;

  auto end_field = [&] {
    record.push_back(std::string(trim(field)));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record.front().empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      // CRLF: the '\n' closes the record.
    } else {
      field.push_back(c);
      if (c != ' ' && c != '\t') field_started = true;
    }
  }
  if (in_quotes) throw InputError(std::string(source) + ": unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();

  if (records.empty()) throw InputError(std::string(source) + ": empty CSV (header row required)");
  // Strip a UTF-8 byte-order mark from the first header cell.
  auto& first = records.front().front();
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);

  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].size() != header.size()) {
      throw InputError(std::string(source) + ": row " + std::to_string(i + 1) + " has " +
                       std::to_string(records[i].size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
  }
  return Table(std::move(header), std::move(records));
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse(in, path.string());
}

double parse_double(std::string_view s, std::string_view context) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InputError("not a finite number: '" + std::string(s) + "'" +
                     (context.empty() ? "" : " (" + std::string(context) + ")"));
  }
  return v;
}

int parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not an integer: '" + std::string(s) + "'" +
                     (context.empty() ? "" : " (" + std::string(context) + ")"));
  }
  return v;
}

std::string format_roundtrip(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string out(buf);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    const auto& f = fields[i];
    if (needs_quotes(f)) {
      out_ << '"';
      for (char c : f) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    } else {
      out_ << f;
    }
  }
  out_ << "\r\n";
}

}  // namespace gse::csv
