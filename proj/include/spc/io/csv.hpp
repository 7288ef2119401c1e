#pragma once

// Versioned CSV tables. The first line is a comment carrying the schema name,
// its version and the hash of the config that produced the file; then a
// header row and the data rows. Comma-separated, '.' decimal, LF endings.
// Numbers are written in shortest round-trip form, so equal inputs give
// byte-identical files.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/geom.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace spc::io {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct CsvTable {
  std::string schema;
  int version = 1;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw DomainError("csv row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }
  void add_numbers(const std::vector<double>& row) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_number(v));
    add(std::move(cells));
  }
};

inline void write_csv(std::ostream& os, const CsvTable& t, std::string_view config_hash) {
  os << "# spc-csv schema=" << t.schema << " version=" << t.version << " config=" << config_hash << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const CsvTable& t, std::string_view config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open " + path + " for writing");
  write_csv(os, t, config_hash);
}

struct CsvFile {
  CsvTable table;
  std::string config_hash;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvFile read_csv(std::istream& is) {
  CsvFile f;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# spc-csv ", 0) != 0) throw DomainError("missing spc-csv header comment");
  std::istringstream hs(line.substr(10));
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const auto k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "schema") f.table.schema = v;
    else if (k == "version") f.table.version = std::stoi(v);
    else if (k == "config") f.config_hash = v;
  }
  if (!std::getline(is, line)) throw DomainError("missing csv header row");
  f.table.columns = split_csv_line(line);
  while (std::getline(is, line)) f.table.add(split_csv_line(line));
  return f;
}

/// Atoms and nonzero patch nodes of a measure: homogeneous coordinates
/// (unit norm) and weight.
template <int K>
CsvTable measure_table(const currents::GridMeasure<K>& mu) {
  CsvTable t;
  t.schema = "measure-p" + std::to_string(K);
  for (int i = 0; i <= K; ++i) {
    t.columns.push_back("re_z" + std::to_string(i));
    t.columns.push_back("im_z" + std::to_string(i));
  }
  t.columns.push_back("weight");
  const auto c = mu.as_cloud();
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<double> row;
    const auto p = normalize<K>(c.points[i]);
    for (const auto& z : p) {
      row.push_back(z.real());
      row.push_back(z.imag());
    }
    row.push_back(c.weights[i]);
    t.add_numbers(row);
  }
  return t;
}

/// Values of a function on the nodes of a chart grid.
template <int K, class Fn>
CsvTable grid_table(const ChartGrid<K>& g, Fn&& fn, const std::string& schema = "grid-values") {
  CsvTable t;
  t.schema = schema;
  t.columns.push_back("chart");
  for (int j = 0; j < K; ++j) {
    t.columns.push_back("re_x" + std::to_string(j + 1));
    t.columns.push_back("im_x" + std::to_string(j + 1));
  }
  t.columns.push_back("value");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.node(g.multi_index(i));
    std::vector<double> row{double(g.chart)};
    for (const auto& c : x) {
      row.push_back(c.real());
      row.push_back(c.imag());
    }
    row.push_back(fn(lift<K>(x, g.chart)));
    t.add_numbers(row);
  }
  return t;
}

}  // namespace spc::io
