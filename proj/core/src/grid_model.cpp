#include "gridgen/grid_model.hpp"

#include "gridgen/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace gridgen {

using nlohmann::json;

int Network::bus_index(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> Network::load_bus_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(buses.size()); ++i)
    if (buses[i].load_weight > 0.0) out.push_back(i);
  return out;
}

std::vector<std::string> Network::countries() const {
  std::set<std::string> s;
  for (const auto& b : buses)
    if (!b.country.empty()) s.insert(b.country);
  return {s.begin(), s.end()};
}

void Network::normalize_load_weights() {
  std::map<std::string, double> sums;
  for (const auto& b : buses)
    if (!b.country.empty()) sums[b.country] += b.load_weight;
  for (auto& b : buses) {
    if (b.country.empty() || b.load_weight == 0.0) continue;
    const double s = sums[b.country];
    if (s <= 0.0)
      fail_input("country " + b.country + " has non-positive total load weight");
    b.load_weight /= s;
  }
}

void Network::rebuild_index() {
  index_.clear();
  for (int i = 0; i < static_cast<int>(buses.size()); ++i) {
    if (!index_.emplace(buses[i].id, i).second)
      fail_input("duplicate bus label '" + buses[i].id + "'");
  }
}

namespace {

double num_field(const json& obj, const char* key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return it->get<double>();
}

bool status_on(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return true;
  return it->get<double>() != 0.0;
}

std::string bus_ref_to_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return std::to_string(static_cast<long long>(v.get<double>()));
  fail_input("bus reference is neither a label nor a number");
}

}  // namespace

Network parse_network(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail_input(std::string("malformed network document: ") + e.what());
  }
  if (!doc.is_object()) fail_input("network document must be a JSON object");

  Network net;
  net.base_power = num_field(doc, "baseMVA", kBaseMW);

  if (!doc.contains("bus") || !doc["bus"].is_object())
    fail_input("network document lacks a 'bus' map");
  for (const auto& [label, b] : doc["bus"].items()) {
    Bus bus;
    bus.id = label;
    if (b.contains("country") && b["country"].is_string())
      bus.country = b["country"].get<std::string>();
    net.buses.push_back(std::move(bus));
  }
  std::sort(net.buses.begin(), net.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  net.rebuild_index();

  if (doc.contains("branch")) {
    std::vector<std::pair<std::string, const json*>> items;
    for (const auto& [label, br] : doc["branch"].items())
      items.emplace_back(label, &br);
    std::sort(items.begin(), items.end());
    for (const auto& [label, brp] : items) {
      const json& br = *brp;
      if (!status_on(br, "br_status")) continue;
      Line line;
      line.id = label;
      const std::string from = bus_ref_to_label(br.at("f_bus"));
      const std::string to = bus_ref_to_label(br.at("t_bus"));
      line.from = net.bus_index(from);
      line.to = net.bus_index(to);
      if (line.from < 0)
        fail_input("branch '" + label + "' references absent bus '" + from + "'");
      if (line.to < 0)
        fail_input("branch '" + label + "' references absent bus '" + to + "'");
      if (br.contains("susceptance"))
        line.susceptance = br["susceptance"].get<double>();
      else if (br.contains("b"))
        line.susceptance = br["b"].get<double>();
      else if (br.contains("br_x"))
        line.susceptance = 1.0 / br["br_x"].get<double>();
      else
        fail_input("branch '" + label + "' lacks a susceptance or reactance");
      line.thermal_limit = num_field(br, "rate_a", 0.0);
      if (!(line.susceptance > 0.0))
        fail_input("branch '" + label + "' has non-positive susceptance");
      if (!(line.thermal_limit > 0.0))
        fail_input("branch '" + label + "' has non-positive thermal limit");
      net.lines.push_back(std::move(line));
    }
  }

  if (doc.contains("gen")) {
    std::vector<std::pair<std::string, const json*>> items;
    for (const auto& [label, g] : doc["gen"].items())
      items.emplace_back(label, &g);
    std::sort(items.begin(), items.end());
    for (const auto& [label, gp] : items) {
      const json& g = *gp;
      if (!status_on(g, "gen_status")) continue;
      Generator gen;
      gen.id = label;
      const std::string bus = bus_ref_to_label(g.at("gen_bus"));
      gen.bus = net.bus_index(bus);
      if (gen.bus < 0)
        fail_input("generator '" + label + "' references absent bus '" + bus + "'");
      gen.rated_power = num_field(g, "pmax", 0.0);
      if (!(gen.rated_power > 0.0))
        fail_input("generator '" + label + "' has non-positive rated power");
      if (g.contains("type") && g["type"].is_string())
        gen.type = gen_type_from_string(g["type"].get<std::string>());
      gen.availability = num_field(g, "availability", 0.0);
      if (gen.availability < 0.0 || gen.availability > 1.0)
        fail_input("generator '" + label + "' availability outside [0, 1]");
      if (g.contains("ramp") && !g["ramp"].is_null())
        gen.ramp_limit = g["ramp"].get<double>();
      else if (gen.type == GenType::coal)
        gen.ramp_limit = 2.0;  // 200 MW per hour on the 100 MW base
      net.generators.push_back(std::move(gen));
    }
  }

  if (doc.contains("load")) {
    for (const auto& [label, l] : doc["load"].items()) {
      const std::string bus = bus_ref_to_label(l.at("load_bus"));
      const int bi = net.bus_index(bus);
      if (bi < 0)
        fail_input("load '" + label + "' references absent bus '" + bus + "'");
      const double w = l.contains("weight") ? l["weight"].get<double>()
                                            : num_field(l, "pd", 0.0);
      if (w < 0.0) fail_input("load '" + label + "' has negative weight");
      net.buses[bi].load_weight += w;
    }
  }

  net.normalize_load_weights();
  return net;
}

Network parse_network_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open network file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

namespace {

std::map<std::string, std::vector<std::string>> read_country_csv(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open country file " + file.string());
  std::string line;
  if (!std::getline(in, line)) fail_input("empty country file " + file.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> codes;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) codes.push_back(cell);
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& c : codes) out[c];
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream rs(line);
    std::size_t col = 0;
    while (std::getline(rs, cell, ',')) {
      if (!cell.empty() && col < codes.size()) out[codes[col]].push_back(cell);
      ++col;
    }
  }
  return out;
}

}  // namespace

void attach_countries(Network& net, const std::filesystem::path& loads_by_country,
                      const std::filesystem::path& gens_by_country) {
  const auto bus_map = read_country_csv(loads_by_country);
  for (const auto& [code, labels] : bus_map) {
    for (const auto& label : labels) {
      const int bi = net.bus_index(label);
      if (bi < 0)
        fail_input("country file lists unknown bus '" + label + "'");
      net.buses[bi].country = code;
    }
  }
  if (!gens_by_country.empty()) {
    const auto gen_map = read_country_csv(gens_by_country);
    std::map<std::string, std::string> by_label;
    for (const auto& [code, labels] : gen_map)
      for (const auto& label : labels) by_label[label] = code;
    for (const auto& g : net.generators) {
      const auto it = by_label.find(g.id);
      if (it == by_label.end()) continue;
      Bus& b = net.buses[g.bus];
      if (b.country.empty()) b.country = it->second;
    }
  }
}

Network remove_small_generators(const Network& net, double threshold) {
  if (threshold < 0.0) fail_input("small-generator threshold must be >= 0");
  Network out = net;
  out.generators.clear();
  for (const auto& g : net.generators)
    if (g.rated_power >= threshold) out.generators.push_back(g);
  out.rebuild_index();
  return out;
}

namespace {

std::vector<int> component_labels(const Network& net, int* count) {
  const int n = static_cast<int>(net.buses.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& l : net.lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<int> label(n, -1);
  int c = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    stack.push_back(s);
    label[s] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (label[v] < 0) {
          label[v] = c;
          stack.push_back(v);
        }
      }
    }
    ++c;
  }
  *count = c;
  return label;
}

}  // namespace

Network restrict_to_largest_component(const Network& net) {
  int count = 0;
  const auto label = component_labels(net, &count);
  if (count <= 1) return net;

  std::vector<int> size(count, 0);
  for (int l : label) ++size[l];
  const int keep =
      static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());

  Network out;
  out.base_power = net.base_power;
  std::vector<int> remap(net.buses.size(), -1);
  for (int i = 0; i < static_cast<int>(net.buses.size()); ++i) {
    if (label[i] != keep) continue;
    remap[i] = static_cast<int>(out.buses.size());
    out.buses.push_back(net.buses[i]);
  }
  for (const auto& l : net.lines) {
    if (remap[l.from] < 0) continue;
    Line nl = l;
    nl.from = remap[l.from];
    nl.to = remap[l.to];
    out.lines.push_back(nl);
  }
  int dropped_gens = 0;
  for (const auto& g : net.generators) {
    if (remap[g.bus] < 0) {
      ++dropped_gens;
      continue;
    }
    Generator ng = g;
    ng.bus = remap[g.bus];
    out.generators.push_back(ng);
  }
  log_warn("network has " + std::to_string(count) +
           " components; keeping the largest (" +
           std::to_string(out.buses.size()) + " of " +
           std::to_string(net.buses.size()) + " buses, dropping " +
           std::to_string(dropped_gens) + " generators)");
  out.rebuild_index();
  out.normalize_load_weights();
  return out;
}

NetworkMatrices build_matrices(const Network& net) {
  NetworkMatrices m;
  const int nb = static_cast<int>(net.buses.size());
  const int nl = static_cast<int>(net.lines.size());
  std::vector<Triplet> trip;
  trip.reserve(2 * nl);
  m.susceptance.resize(nl);
  m.thermal_limit.resize(nl);
  for (int a = 0; a < nl; ++a) {
    const Line& l = net.lines[a];
    trip.emplace_back(l.from, a, 1.0);
    trip.emplace_back(l.to, a, -1.0);
    m.susceptance[a] = l.susceptance;
    m.thermal_limit[a] = l.thermal_limit;
  }
  m.incidence.resize(nb, nl);
  m.incidence.setFromTriplets(trip.begin(), trip.end());
  return m;
}

NetworkReport validate_network(const Network& net) {
  NetworkReport r;
  component_labels(net, &r.component_count);
  r.connected = (r.component_count <= 1);

  std::map<std::string, double> sums;
  for (const auto& b : net.buses)
    if (!b.country.empty() && b.load_weight > 0.0)
      sums[b.country] += b.load_weight;
  for (const auto& [code, s] : sums)
    r.weight_sum_deviation[code] = std::abs(s - 1.0);

  for (const auto& g : net.generators) {
    r.generator_count[g.type] += 1;
    r.rated_power_total[g.type] += g.rated_power;
  }
  return r;
}

std::string NetworkReport::to_text() const {
  std::ostringstream os;
  os << "connected: " << (connected ? "true" : "false")
     << " (components: " << component_count << ")\n";
  for (const auto& [code, dev] : weight_sum_deviation)
    os << "load-weight deviation " << code << ": " << dev << "\n";
  for (const auto& [type, n] : generator_count) {
    os << "generators " << to_string(type) << ": " << n << " units, "
       << (rated_power_total.count(type) ? rated_power_total.at(type) : 0.0)
       << " pu rated\n";
  }
  return os.str();
}

}  // namespace gridgen
