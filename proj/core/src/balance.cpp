#include "gridgen/balance.hpp"

namespace gridgen {

std::vector<BalanceRecord> compute_scaling_factors(
    const std::map<std::string, double>& production,
    const std::map<std::string, double>& exports,
    const std::map<std::string, double>& raw_loads) {
  std::vector<BalanceRecord> out;
  out.reserve(production.size());
  for (const auto& [country, prod] : production) {
    const auto le = raw_loads.find(country);
    if (le == raw_loads.end())
      fail_input("no raw load for country " + country);
    const auto ee = exports.find(country);
    const double exp_mean = ee == exports.end() ? 0.0 : ee->second;
    BalanceRecord r;
    r.country = country;
    r.production = prod;
    r.export_mean = exp_mean;
    r.raw_load = le->second;
    if (!(r.raw_load > 0.0))
      fail_input("raw load for " + country + " must be positive");
    r.scaling_factor = (r.production - r.export_mean) / r.raw_load;
    if (!(r.scaling_factor > 0.0))
      fail_input("country " + country +
                 ": production does not cover exports (scaling factor " +
                 std::to_string(r.scaling_factor) + ")");
    out.push_back(r);
  }
  return out;
}

std::map<GenType, AnnualSeries> aggregate_by_type(
    const std::vector<AnnualSeries>& units,
    const std::map<std::string, GenType>& type_map) {
  std::map<GenType, AnnualSeries> out;
  for (const auto& u : units) {
    const auto it = type_map.find(u.region);
    const GenType type = it == type_map.end() ? GenType::other : it->second;
    auto& agg = out[type];
    if (agg.values.size() == 0) {
      agg.values = Vec::Zero(u.values.size());
      agg.region = to_string(type);
      agg.ref_year = u.ref_year;
    }
    if (agg.values.size() != u.values.size())
      fail_input("type aggregation: unit '" + u.region + "' length mismatch");
    agg.values += u.values;
  }
  return out;
}

double availability_from_aggregate(double annual_mean_output,
                                   double rated_power_total) {
  if (!(rated_power_total > 0.0))
    fail_input("availability requires positive rated power");
  const double a = annual_mean_output / rated_power_total;
  if (a < 0.0 || a > 1.0 + 1e-9)
    fail_input("implied availability " + std::to_string(a) +
               " lies outside [0, 1]");
  return std::min(a, 1.0);
}

std::map<std::string, double> expected_production_by_country(
    const Network& net,
    const std::map<std::string, AnnualSeries>& nuclear_profiles) {
  std::map<std::string, double> prod;
  for (const auto& g : net.generators) {
    const std::string& country = net.buses[g.bus].country;
    if (country.empty())
      fail_input("generator '" + g.id + "' has no country assigned");
    if (g.dispatchable()) {
      prod[country] += g.availability * g.rated_power;
    } else {
      const auto it = nuclear_profiles.find(g.id);
      if (it == nuclear_profiles.end())
        fail_input("no nuclear profile for generator '" + g.id + "'");
      prod[country] += it->second.values.mean();
    }
  }
  return prod;
}

}  // namespace gridgen
