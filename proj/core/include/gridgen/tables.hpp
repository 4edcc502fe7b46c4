#pragma once

#include "gridgen/common.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gridgen {

// Column-labeled time-series table; rows are hourly steps.
struct Table {
  std::vector<std::string> labels;
  Mat values;  // rows x labels.size()

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  int column(const std::string& label) const;  // -1 when absent
  Vec row_sums() const { return values.rowwise().sum(); }
};

// Comma-separated, LF line endings, header row of labels, 12 significant
// digits per value.
void write_table_csv(const std::filesystem::path& file, const Table& table,
                     int significant_digits = 12);

// expected_rows < 0 skips the row-count check.
Table read_table_csv(const std::filesystem::path& file,
                     int expected_rows = kStepsPerYear);

}  // namespace gridgen
