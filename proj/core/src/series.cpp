#include "gridgen/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridgen {

namespace {

std::int64_t days_from_civil(int y, int m, int d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) fail_input("invalid civil date in timestamp");
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

std::int64_t hours_from_epoch(int year, int month, int day, int hour) {
  return days_from_civil(year, month, day) * 24 + hour;
}

int weekday_iso(int year, int month, int day) {
  const std::chrono::weekday wd{
      std::chrono::sys_days{std::chrono::year_month_day{
          std::chrono::year{year}, std::chrono::month{unsigned(month)},
          std::chrono::day{unsigned(day)}}}};
  return static_cast<int>(wd.iso_encoding());
}

int days_to_first_monday(int year) {
  return (8 - weekday_iso(year, 1, 1)) % 7;
}

std::int64_t parse_timestamp_hours(const std::string& iso) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const int n = std::sscanf(iso.c_str(), "%d-%d-%d%*1[T ]%d:%d:%d", &y, &mo,
                            &d, &h, &mi, &s);
  if (n < 4) fail_input("unparsable timestamp: '" + iso + "'");
  if (mi != 0 || s != 0)
    fail_input("timestamp not on the hour: '" + iso + "'");
  if (h < 0 || h > 23) fail_input("hour out of range: '" + iso + "'");
  return hours_from_epoch(y, mo, d, h);
}

RawSeries fill_gaps(const RawSeries& s, int max_gap_run) {
  const Eigen::Index n = s.values.size();
  if (n == 0) return s;
  if (std::isnan(s.values[0]) || std::isnan(s.values[n - 1]))
    fail_input("series '" + s.region + "' has a missing endpoint");

  RawSeries out = s;
  Eigen::Index i = 0;
  while (i < n) {
    if (!std::isnan(out.values[i])) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j < n && std::isnan(out.values[j])) ++j;
    const Eigen::Index run = j - i;
    if (run > max_gap_run)
      fail_input("series '" + s.region + "': gap of " + std::to_string(run) +
                 " steps exceeds the interpolation limit of " +
                 std::to_string(max_gap_run));
    const double left = out.values[i - 1];
    const double right = out.values[j];
    for (Eigen::Index k = i; k < j; ++k) {
      const double w = static_cast<double>(k - i + 1) /
                       static_cast<double>(run + 1);
      out.values[k] = left + w * (right - left);
    }
    i = j;
  }
  return out;
}

AnnualSeries canonicalize_year(const RawSeries& s, int year) {
  const std::int64_t start = hours_from_epoch(year, 1, 1, 0);
  const auto it = std::lower_bound(s.hours.begin(), s.hours.end(), start);
  if (it == s.hours.end() || *it != start)
    fail_input("series '" + s.region + "' does not cover " +
               std::to_string(year) + "-01-01 00:00");
  const Eigen::Index offset = it - s.hours.begin();
  if (s.values.size() - offset < kStepsPerYear)
    fail_input("series '" + s.region + "' is shorter than " +
               std::to_string(kStepsPerYear) + " steps for year " +
               std::to_string(year));
  for (Eigen::Index k = 0; k < kStepsPerYear; ++k) {
    if (s.hours[offset + k] != start + k)
      fail_input("series '" + s.region + "' is not hourly-contiguous in " +
                 std::to_string(year));
    if (std::isnan(s.values[offset + k]))
      fail_input("series '" + s.region + "' has unfilled gaps in " +
                 std::to_string(year));
  }

  const int rot = kHoursPerDay * days_to_first_monday(year);
  AnnualSeries out;
  out.values.resize(kStepsPerYear);
  for (Eigen::Index k = 0; k < kStepsPerYear; ++k)
    out.values[k] = s.values[offset + (k + rot) % kStepsPerYear];
  out.region = s.region;
  out.ref_year = year;
  return out;
}

double pearson(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() == 0)
    fail_input("pearson: length mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = a.mean();
  const double mb = b.mean();
  const Vec da = a.array() - ma;
  const Vec db = b.array() - mb;
  const double va = da.squaredNorm() / n;
  const double vb = db.squaredNorm() / n;
  if (va <= 0.0 || vb <= 0.0) fail_input("pearson: zero-variance input");
  return (da.dot(db) / n) / std::sqrt(va * vb);
}

RawSeries read_raw_series_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open series file " + file.string());
  std::string line;
  if (!std::getline(in, line)) fail_input("empty series file " + file.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto comma = line.find(',');
  if (comma == std::string::npos)
    fail_input("series file " + file.string() + " has no value column");

  RawSeries s;
  s.region = line.substr(comma + 1);
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = line.find(',');
    if (c == std::string::npos)
      fail_input("malformed row in " + file.string() + ": '" + line + "'");
    s.hours.push_back(parse_timestamp_hours(line.substr(0, c)));
    const std::string cell = line.substr(c + 1);
    if (cell.empty()) {
      vals.push_back(std::nan(""));
    } else {
      vals.push_back(std::stod(cell));
    }
  }
  for (std::size_t i = 1; i < s.hours.size(); ++i) {
    if (s.hours[i] != s.hours[i - 1] + 1)
      fail_input("series file " + file.string() +
                 " is not strictly hourly at row " + std::to_string(i + 1));
  }
  s.values = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return s;
}

void write_annual_series_csv(const std::filesystem::path& file,
                             const AnnualSeries& s) {
  if (s.values.size() != kStepsPerYear)
    fail_input("annual series must have exactly " +
               std::to_string(kStepsPerYear) + " steps");
  std::ofstream out(file);
  if (!out) fail_input("cannot write " + file.string());
  out << s.region << "\n";
  char buf[48];
  for (Eigen::Index t = 0; t < s.values.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%.12g", s.values[t]);
    out << buf << "\n";
  }
  if (!out) fail_input("short write to " + file.string());
}

AnnualSeries read_annual_series_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open series file " + file.string());
  std::string line;
  if (!std::getline(in, line)) fail_input("empty series file " + file.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  AnnualSeries s;
  s.region = line;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  if (static_cast<int>(vals.size()) != kStepsPerYear)
    fail_input("series file " + file.string() + " has " +
               std::to_string(vals.size()) + " rows, expected " +
               std::to_string(kStepsPerYear));
  s.values = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return s;
}

}  // namespace gridgen
