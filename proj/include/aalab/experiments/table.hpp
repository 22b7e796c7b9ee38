#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"

namespace aalab {

/// Numeric table with named columns; the CSV form prints every value with
/// 17 significant digits so a parse of the text returns the same doubles.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw ShapeMismatch("table row has " + std::to_string(row.size()) + " cells, expected " +
                                                          std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ConfigError("table has no column '" + name + "'");
  }
  std::vector<double> column(const std::string& name) const {
    const std::size_t c = index(name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }

  std::string to_csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + detail::fmt_num(r[i]);
      s += '\n';
    }
    return s;
  }

  static Table from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw ConfigError("csv: missing header");
    Table t;
    std::istringstream head(line);
    for (std::string cell; std::getline(head, cell, ',');) t.columns.push_back(cell);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::istringstream cells(line);
      for (std::string cell; std::getline(cells, cell, ',');) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') throw ConfigError("csv: bad number '" + cell + "'");
        row.push_back(v);
      }
      t.add(std::move(row));
    }
    return t;
  }

  static Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_csv(ss.str());
  }
};

/// Any object with write_csv(std::ostream&) as a table.
template <class T>
Table to_table(const T& obj) {
  std::ostringstream os;
  obj.write_csv(os);
  return Table::from_csv(os.str());
}

}  // namespace aalab
