#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal CSV reader/writer for the tool's table formats. Numeric fields
// are printed with snprintf("%.12g"), which is locale-independent as long
// as nobody calls setlocale (this library never does).

namespace nvlac {

// Filesystem-level failure (open/write), as opposed to malformed content.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nvlac

namespace nvlac::csv {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Table {
  std::vector<std::string> comments;  // lines written/read as "# ..."
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::invalid_argument("csv::Table: no column named '" + name + "'");
  }
};

inline void write(const Table& table, std::ostream& os) {
  for (const auto& c : table.comments) os << "# " << c << "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    os << (i ? "," : "") << table.header[i];
  }
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << "\n";
  }
}

inline void write_file(const Table& table, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("csv: cannot open '" + path + "' for writing");
  write(table, os);
  if (!os.good()) throw IoError("csv: write failed for '" + path + "'");
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline Table read(std::istream& is) {
  Table table;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::size_t start = 1;
      if (start < line.size() && line[start] == ' ') ++start;
      table.comments.push_back(line.substr(start));
      continue;
    }
    if (!header_seen) {
      table.header = split_line(line);
      header_seen = true;
      continue;
    }
    const auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw std::invalid_argument("csv: row with " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: non-numeric field '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw std::invalid_argument("csv: missing header row");
  return table;
}

inline Table read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("csv: cannot open '" + path + "' for reading");
  return read(is);
}

}  // namespace nvlac::csv
