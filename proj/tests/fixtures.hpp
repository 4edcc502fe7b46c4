#pragma once

#include "gridgen/grid_model.hpp"
#include "gridgen/series.hpp"
#include "gridgen/tables.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gridgen::testing {

// Two-country 30-bus grid: two meshed rings with chords and three ties,
// ten generators (one nuclear, three coal with ramp limits, gas and hydro).
// thermal_scale < 1 tightens every line limit (congested variant).
Network two_country_grid(double thermal_scale = 1.0);

// The same network serialized as a JSON document.
std::string two_country_grid_json(double thermal_scale = 1.0);

// Constructed hourly national history for one calendar year, MW. Smooth
// seasonal/weekly/daily structure whose harmonic content varies by year.
RawSeries national_load_history(const std::string& country, int year,
                                double mean_mw);

// Rated output with one contiguous maintenance window (zero output).
RawSeries nuclear_history(const std::string& label, int year, double rated_mw,
                          int window_start_day, int window_days);

// 364-day constant-free synthetic canonical years for ensemble tests:
// harmonics with year-dependent amplitudes around a common profile.
std::vector<Vec> synthetic_canonical_years(int n_years, double mean,
                                           unsigned seed);

// Writes network.json plus history/ (loads, nuclear, exports.csv) for the
// two-country fixture; returns the directory.
struct FixtureFiles {
  std::filesystem::path network;
  std::filesystem::path history;
};
FixtureFiles write_fixture_tree(const std::filesystem::path& dir,
                                const std::vector<int>& years,
                                double thermal_scale = 1.0);

// Flat per-bus load table matching the network's weights; total is constant
// over time. Used for dispatch tests that need a feasible constant point.
Table flat_load_table(const Network& net, int horizon, double total);

// Smooth time-varying load table with the given mean total and relative
// amplitude; per-bus shares follow the load weights.
Table wavy_load_table(const Network& net, int horizon, double mean_total,
                      double rel_amplitude);

// Nuclear profiles for the fixture's unit, horizon steps, per-unit.
std::map<std::string, AnnualSeries> fixture_nuclear_profiles(int horizon);

// Expected dispatchable production of the fixture (sum A_i * rated_i).
double fixture_expected_dispatchable();

// Scales a load table so the net of nuclear matches expected production.
void rebalance_loads(Table& loads, const Network& net,
                     const std::map<std::string, AnnualSeries>& nuclear);

std::filesystem::path make_temp_dir(const std::string& hint);

}  // namespace gridgen::testing
