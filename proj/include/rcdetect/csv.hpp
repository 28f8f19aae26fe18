#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "rcdetect/errors.hpp"

namespace rcdetect {

// Minimal CSV layer for the project's own file formats: comma-separated,
// UTF-8, header row required, no quoting. Lines starting with '#' are
// comments (report files carry a "# cfg_hash=... seed=..." first row).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column, -1 if absent.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw EmptyInputError("empty CSV input: no header row");
  return table;
}

inline std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += fields[i];
  }
  return out;
}

// Emits optional "# ..." comment lines, then header, then rows. The output
// reparses through read_csv to the same table.
inline void write_csv(std::ostream& out, const CsvTable& table,
                      const std::vector<std::string>& comment_lines = {}) {
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << join_csv(table.header) << '\n';
  for (const auto& row : table.rows) out << join_csv(row) << '\n';
}

inline uint64_t parse_u64_field(const std::string& s, const std::string& what) {
  if (s.empty()) throw ParseError("empty " + what + " field");
  uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw ParseError("non-numeric " + what + " field \"" + s + "\"");
    v = v * 10 + static_cast<uint64_t>(c - '0');
  }
  return v;
}

inline double parse_double_field(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("trailing junk in " + what + " field \"" + s + "\"");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("non-numeric " + what + " field \"" + s + "\"");
  } catch (const std::out_of_range&) {
    throw ParseError("out-of-range " + what + " field \"" + s + "\"");
  }
}

// Shortest exact decimal form: %.17g always round-trips a double, so files
// written with this reparse to the identical value.
inline std::string format_double_field(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace rcdetect
