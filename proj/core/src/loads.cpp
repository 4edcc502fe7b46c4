#include "gridgen/loads.hpp"

#include "gridgen/log.hpp"

#include <cmath>

namespace gridgen {

Table disaggregate(const Network& net,
                   const std::map<std::string, FourierEnsemble>& ensembles,
                   const std::map<std::string, double>& mean_targets,
                   const DisaggregateOptions& options) {
  const auto load_buses = net.load_bus_indices();
  if (load_buses.empty()) fail_input("network has no load buses");

  Table table;
  table.labels.reserve(load_buses.size());
  for (int b : load_buses) table.labels.push_back(net.buses[b].id);

  // Group columns by country so each block can be rescaled to its target.
  std::map<std::string, std::vector<int>> columns_by_country;
  for (std::size_t c = 0; c < load_buses.size(); ++c) {
    const Bus& bus = net.buses[load_buses[c]];
    if (bus.country.empty())
      fail_input("load bus '" + bus.id + "' has no country assigned");
    columns_by_country[bus.country].push_back(static_cast<int>(c));
  }

  int length = 0;
  for (const auto& [country, cols] : columns_by_country) {
    const auto it = ensembles.find(country);
    if (it == ensembles.end())
      fail_input("country " + country + " has load buses but no ensemble");
    if (length == 0)
      length = it->second.length;
    else if (length != it->second.length)
      fail_input("ensembles disagree on series length");
  }
  table.values.resize(length, static_cast<Eigen::Index>(load_buses.size()));

  for (const auto& [country, cols] : columns_by_country) {
    const FourierEnsemble& ens = ensembles.at(country);
    const EnsembleSampler sampler(ens);
    const auto te = mean_targets.find(country);
    if (te == mean_targets.end())
      fail_input("no load target for country " + country);

    Vec country_total = Vec::Zero(length);
    for (int c : cols) {
      const Bus& bus = net.buses[load_buses[c]];
      RngStream::Key key(options.seed);
      key.add("load").add(country).add(bus.id).add(options.replica);
      RngStream rng(key);
      table.values.col(c) = bus.load_weight * sampler.sample(rng);
      country_total += table.values.col(c);
    }
    const double realized_mean = country_total.mean();
    if (!(realized_mean > 0.0))
      fail_input("sampled load for " + country +
                 " has non-positive mean; cannot rescale to the balance");
    const double lambda = te->second / realized_mean;
    for (int c : cols) table.values.col(c) *= lambda;
  }

  if (options.clamp_negative) {
    const auto n_neg = (table.values.array() < 0.0).count();
    table.values = table.values.cwiseMax(0.0);
    if (n_neg > 0)
      log_warn("clamped " + std::to_string(n_neg) +
               " negative load values to zero; summed loads no longer match "
               "the balance targets exactly");
  }
  return table;
}

std::map<std::string, double> balanced_mean_targets(
    const std::map<std::string, double>& production_by_country,
    const std::map<std::string, double>& exports_by_country) {
  double total_production = 0.0;
  double total_target = 0.0;
  std::map<std::string, double> targets;
  for (const auto& [country, prod] : production_by_country) {
    const auto ee = exports_by_country.find(country);
    const double exp_mean = ee == exports_by_country.end() ? 0.0 : ee->second;
    const double target = prod - exp_mean;
    if (!(target > 0.0))
      fail_input("country " + country +
                 ": production minus export is not positive");
    targets[country] = target;
    total_production += prod;
    total_target += target;
  }
  if (targets.empty()) fail_input("no countries with production");
  // Net exports across the whole system rarely cancel exactly; spread the
  // residual proportionally so total load equals total expected production.
  const double global = total_production / total_target;
  if (std::abs(global - 1.0) > 1e-6)
    log_info("net exports leave a " + std::to_string((global - 1.0) * 100.0) +
             "% load correction across the system");
  for (auto& [country, t] : targets) t *= global;
  return targets;
}

}  // namespace gridgen
