#include "gridgen/tables.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridgen {

int Table::column(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

void write_table_csv(const std::filesystem::path& file, const Table& table,
                     int significant_digits) {
  if (static_cast<int>(table.labels.size()) != table.cols())
    fail_input("table label count does not match column count");
  std::ofstream out(file, std::ios::binary);
  if (!out) fail_input("cannot write " + file.string());

  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    if (i) out << ',';
    out << table.labels[i];
  }
  out << '\n';

  char buf[48];
  std::string line;
  for (int t = 0; t < table.rows(); ++t) {
    line.clear();
    for (int c = 0; c < table.cols(); ++c) {
      if (c) line.push_back(',');
      std::snprintf(buf, sizeof(buf), "%.*g", significant_digits,
                    table.values(t, c));
      line += buf;
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) fail_input("short write to " + file.string());
}

Table read_table_csv(const std::filesystem::path& file, int expected_rows) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail_input("cannot open table " + file.string());
  std::string line;
  if (!std::getline(in, line)) fail_input("empty table " + file.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Table table;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.labels.push_back(cell);
  }
  const int ncol = static_cast<int>(table.labels.size());
  if (ncol == 0) fail_input("table " + file.string() + " has no columns");

  std::vector<double> data;
  int nrow = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.c_str();
    for (int c = 0; c < ncol; ++c) {
      char* end = nullptr;
      data.push_back(std::strtod(p, &end));
      if (end == p)
        fail_input("table " + file.string() + ": bad value at row " +
                   std::to_string(nrow + 1) + ", column " + std::to_string(c));
      p = end;
      if (c + 1 < ncol) {
        if (*p != ',')
          fail_input("table " + file.string() + ": row " +
                     std::to_string(nrow + 1) + " has too few columns");
        ++p;
      }
    }
    ++nrow;
  }
  if (expected_rows >= 0 && nrow != expected_rows)
    fail_input("table " + file.string() + " has " + std::to_string(nrow) +
               " data rows, expected " + std::to_string(expected_rows));

  table.values.resize(nrow, ncol);
  for (int t = 0; t < nrow; ++t)
    for (int c = 0; c < ncol; ++c) table.values(t, c) = data[t * ncol + c];
  return table;
}

}  // namespace gridgen
