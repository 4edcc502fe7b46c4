#pragma once

#include "gridgen/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gridgen {

// Hourly series as read from a history file. Gaps are NaN values; the
// timestamps are hours since 1970-01-01 00:00 on the civil clock of the
// source (no timezone handling beyond what the input encodes).
struct RawSeries {
  std::vector<std::int64_t> hours;  // strictly increasing, unit spacing
  Vec values;                       // NaN marks a gap
  std::string region;
};

// Canonical year: 364 days of hourly values starting on a Monday 00:00.
struct AnnualSeries {
  Vec values;  // length kStepsPerYear
  std::string region;
  int ref_year = 0;
};

// Civil-calendar helpers (proleptic Gregorian).
std::int64_t hours_from_epoch(int year, int month, int day, int hour);
int weekday_iso(int year, int month, int day);  // Monday = 1 .. Sunday = 7
// Days from January 1 of `year` to that year's first Monday (0 when
// January 1 already is a Monday).
int days_to_first_monday(int year);

// Parses "YYYY-MM-DD[T ]HH[:MM[:SS]][Z]"; trailing zone offsets are ignored.
std::int64_t parse_timestamp_hours(const std::string& iso);

// Replaces NaN runs with linear interpolation between the nearest present
// neighbors. A run longer than max_gap_run steps, or a missing endpoint,
// is an input error. Present entries are left bit-identical.
RawSeries fill_gaps(const RawSeries& s, int max_gap_run = 24);

// Extracts the given calendar year, truncates it to 8736 steps (dropping
// the tail of the year), then rotates left by whole days so that the
// result starts on the year's first Monday at 00:00.
AnnualSeries canonicalize_year(const RawSeries& s, int year);

// Standard centered, normalized inner product of two equal-length series.
double pearson(const Vec& a, const Vec& b);

// One-column CSV files: "timestamp,<label>" rows of ISO timestamps and
// values; blank value cells denote gaps.
RawSeries read_raw_series_csv(const std::filesystem::path& file);
// Canonical series files: single header cell = label, 8736 value rows.
void write_annual_series_csv(const std::filesystem::path& file,
                             const AnnualSeries& s);
AnnualSeries read_annual_series_csv(const std::filesystem::path& file);

}  // namespace gridgen
