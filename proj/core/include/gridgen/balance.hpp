#pragma once

#include "gridgen/common.hpp"
#include "gridgen/grid_model.hpp"
#include "gridgen/series.hpp"

#include <map>
#include <string>
#include <vector>

namespace gridgen {

// Per-country annual energy bookkeeping: production - load - export = 0
// once the raw load is multiplied by scaling_factor. All values per-unit.
struct BalanceRecord {
  std::string country;
  double production = 0.0;   // annual mean
  double export_mean = 0.0;  // annual mean, positive = net export
  double raw_load = 0.0;     // annual mean before scaling
  double scaling_factor = 0.0;

  double scaled_load() const { return raw_load * scaling_factor; }
};

// scaling_factor = (production - export) / raw_load per country. Throws on
// non-positive raw load or a non-positive resulting factor.
std::vector<BalanceRecord> compute_scaling_factors(
    const std::map<std::string, double>& production,
    const std::map<std::string, double>& exports,
    const std::map<std::string, double>& raw_loads);

// Element-wise sums of canonical unit series per generator type. Units
// missing from the map land in GenType::other.
std::map<GenType, AnnualSeries> aggregate_by_type(
    const std::vector<AnnualSeries>& units,
    const std::map<std::string, GenType>& type_map);

// Availability factor implied by an aggregated annual mean output.
double availability_from_aggregate(double annual_mean_output,
                                   double rated_power_total);

// Expected annual-mean production of a country: availability-weighted rated
// power of its dispatchable generators plus the mean of its nuclear
// profiles (already canonical, per-unit).
std::map<std::string, double> expected_production_by_country(
    const Network& net, const std::map<std::string, AnnualSeries>& nuclear_profiles);

}  // namespace gridgen
