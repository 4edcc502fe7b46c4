#pragma once

#include "gridgen/common.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridgen {

struct Bus {
  std::string id;
  std::string country;      // two-letter code, may be empty for transit buses
  double load_weight = 0.0; // fraction of the national load served here
};

struct Line {
  std::string id;
  int from = -1;  // bus indices
  int to = -1;
  double susceptance = 0.0;   // per-unit, > 0
  double thermal_limit = 0.0; // per-unit, > 0
};

struct Generator {
  std::string id;
  int bus = -1;
  GenType type = GenType::other;
  double rated_power = 0.0;  // per-unit
  double availability = 0.0; // fraction of rated power produced on annual mean
  std::optional<double> ramp_limit;  // per-unit per hour; absent = unconstrained

  bool dispatchable() const { return type != GenType::nuclear; }
};

class Network {
 public:
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  double base_power = kBaseMW;

  int bus_index(const std::string& id) const;  // -1 when absent
  std::vector<int> load_bus_indices() const;   // buses with positive weight
  std::vector<std::string> countries() const;  // sorted, non-empty codes

  // Rescales load weights so that they sum to one within each country.
  void normalize_load_weights();
  void rebuild_index();

 private:
  std::map<std::string, int> index_;
};

struct NetworkMatrices {
  SpMat incidence;    // buses x lines, +1 at from, -1 at to
  Vec susceptance;    // per line, input order
  Vec thermal_limit;  // per line, input order
};

// Reads a network document: a JSON object with "bus", "branch", "gen" and
// "load" maps keyed by element label, plus "baseMVA". Unknown fields are
// ignored; zero-status elements are dropped. Branch susceptance is taken
// from "br_x" (as 1/x) or directly from "b"/"susceptance".
Network parse_network(const std::string& json_text);
Network parse_network_file(const std::filesystem::path& file);

// Country membership files: CSV whose column headers are two-letter country
// codes and whose cells are element labels. The first file assigns bus
// countries (load membership), the second is accepted for generators and
// resolved through their bus.
void attach_countries(Network& net, const std::filesystem::path& loads_by_country,
                      const std::filesystem::path& gens_by_country);

// Drops every generator with rated power strictly below the threshold.
Network remove_small_generators(const Network& net, double threshold);

// Keeps the largest connected component; dropped elements are logged and
// remaining load weights re-normalized.
Network restrict_to_largest_component(const Network& net);

NetworkMatrices build_matrices(const Network& net);

struct NetworkReport {
  bool connected = false;
  int component_count = 0;
  std::map<std::string, double> weight_sum_deviation;  // per country, |sum-1|
  std::map<GenType, int> generator_count;
  std::map<GenType, double> rated_power_total;  // per-unit
  std::string to_text() const;
};

NetworkReport validate_network(const Network& net);

}  // namespace gridgen
