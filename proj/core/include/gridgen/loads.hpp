#pragma once

#include "gridgen/common.hpp"
#include "gridgen/ensemble.hpp"
#include "gridgen/grid_model.hpp"
#include "gridgen/tables.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace gridgen {

struct DisaggregateOptions {
  std::uint64_t seed = 0;
  std::string replica = "1";  // replica label, e.g. "2016_1"
  // Floors sampled loads at zero. Off by default: flooring distorts the
  // summed load the dispatch balances against. Recorded in run metadata.
  bool clamp_negative = false;
};

// Draws one independent series per load bus from its country's ensemble,
// multiplies it by the bus load weight, and rescales each country block so
// that the country's annual-mean total equals mean_targets[country].
// Column order follows the network's bus order; headers are bus labels.
// The RNG stream of a column depends only on
// (seed, country, bus label, replica), so any column can be regenerated in
// isolation.
Table disaggregate(const Network& net,
                   const std::map<std::string, FourierEnsemble>& ensembles,
                   const std::map<std::string, double>& mean_targets,
                   const DisaggregateOptions& options);

// Country annual-mean load targets that make the summed load compatible
// with the dispatch: per country, expected production minus net export,
// multiplied by a single global factor that makes the grand total equal
// total expected production (net exports need not cancel exactly in the
// input data).
std::map<std::string, double> balanced_mean_targets(
    const std::map<std::string, double>& production_by_country,
    const std::map<std::string, double>& exports_by_country);

}  // namespace gridgen
