#include "fixtures.hpp"

#include "gridgen/rng.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <unistd.h>

namespace gridgen::testing {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct GenSpec {
  const char* id;
  const char* bus;
  const char* type;
  double rated;
  double availability;
};

const std::vector<GenSpec>& generator_specs() {
  static const std::vector<GenSpec> specs = {
      {"g_nuc", "a01", "nuclear", 6.0, 0.923},
      {"g_coal1", "a04", "coal", 4.0, 0.55},
      {"g_coal2", "a09", "coal", 3.0, 0.50},
      {"g_coal3", "b04", "coal", 4.0, 0.45},
      {"g_gas1", "a13", "gas_oil", 3.0, 0.35},
      {"g_gas2", "b09", "gas_oil", 4.0, 0.30},
      {"g_gas3", "b13", "gas_oil", 2.0, 0.40},
      {"g_hyd1", "a07", "hydro_storage", 3.0, 0.45},
      {"g_hyd2", "b07", "hydro_storage", 3.0, 0.50},
      {"g_riv1", "b01", "hydro_river", 2.0, 0.60},
  };
  return specs;
}

std::string bus_name(char prefix, int i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%c%02d", prefix, i);
  return buf;
}

}  // namespace

std::string two_country_grid_json(double thermal_scale) {
  json doc;
  doc["baseMVA"] = 100.0;

  for (int i = 1; i <= 15; ++i) {
    doc["bus"][bus_name('a', i)] = {{"country", "AA"}};
    doc["bus"][bus_name('b', i)] = {{"country", "BB"}};
  }

  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> susc(5.0, 20.0);
  int line_id = 0;
  auto add_line = [&](const std::string& f, const std::string& t,
                      double limit) {
    json br;
    br["f_bus"] = f;
    br["t_bus"] = t;
    br["susceptance"] = susc(rng);
    br["rate_a"] = limit * thermal_scale;
    char name[16];
    std::snprintf(name, sizeof(name), "l%03d", ++line_id);
    doc["branch"][name] = br;
  };
  for (char p : {'a', 'b'}) {
    for (int i = 1; i <= 15; ++i)
      add_line(bus_name(p, i), bus_name(p, i % 15 + 1), 5.0);
    add_line(bus_name(p, 1), bus_name(p, 8), 4.0);
    add_line(bus_name(p, 3), bus_name(p, 12), 4.0);
    add_line(bus_name(p, 5), bus_name(p, 10), 4.0);
  }
  add_line("a05", "b05", 6.0);
  add_line("a10", "b10", 6.0);
  add_line("a15", "b15", 6.0);

  for (const auto& g : generator_specs()) {
    json gen;
    gen["gen_bus"] = g.bus;
    gen["pmax"] = g.rated;
    gen["type"] = g.type;
    gen["availability"] = g.availability;
    doc["gen"][g.id] = gen;
  }

  int load_id = 0;
  for (char p : {'a', 'b'}) {
    for (int i = 1; i <= 15; ++i) {
      json load;
      load["load_bus"] = bus_name(p, i);
      load["weight"] = 1.0 + (i % 5);
      char name[16];
      std::snprintf(name, sizeof(name), "d%03d", ++load_id);
      doc["load"][name] = load;
    }
  }
  return doc.dump(1);
}

Network two_country_grid(double thermal_scale) {
  return parse_network(two_country_grid_json(thermal_scale));
}

namespace {

std::string iso_from_hours(std::int64_t hours) {
  const std::int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
  const int hour = static_cast<int>(hours - days * 24);
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), hour);
  return buf;
}

int hours_in_year(int year) {
  return static_cast<int>(hours_from_epoch(year + 1, 1, 1, 0) -
                          hours_from_epoch(year, 1, 1, 0));
}

}  // namespace

RawSeries national_load_history(const std::string& country, int year,
                                double mean_mw) {
  const std::int64_t start = hours_from_epoch(year, 1, 1, 0);
  const int n = hours_in_year(year);

  RngStream::Key key(7001);
  key.add(country).add(static_cast<std::uint64_t>(year));
  RngStream rng(key);
  // Year-specific harmonic perturbations on top of a shared profile.
  const double a_season = 0.04 * rng.normal();
  const double a_week = 0.03 * rng.normal();
  const double a_day = 0.03 * rng.normal();
  const double a_half_day = 0.02 * rng.normal();
  const double ph_season = rng.uniform_angle();
  const double ph_day = rng.uniform_angle();
  const double level = 1.0 + 0.02 * rng.normal();

  RawSeries s;
  s.region = country;
  s.hours.resize(n);
  s.values.resize(n);
  for (int t = 0; t < n; ++t) {
    s.hours[t] = start + t;
    const double day = t / 24.0;
    const double seasonal = 0.15 * std::cos(2 * kPi * (day - 15.0) / 365.0) +
                            a_season * std::cos(2 * kPi * day / 365.0 + ph_season);
    const double weekly =
        0.06 * std::cos(2 * kPi * t / 168.0) +
        a_week * std::cos(4 * kPi * t / 168.0);
    const double daily =
        0.08 * std::cos(2 * kPi * (t - 18) / 24.0) +
        a_day * std::cos(2 * kPi * t / 24.0 + ph_day) +
        a_half_day * std::cos(4 * kPi * t / 24.0);
    s.values[t] = mean_mw * level * (1.0 + seasonal + weekly + daily);
  }
  return s;
}

RawSeries nuclear_history(const std::string& label, int year, double rated_mw,
                          int window_start_day, int window_days) {
  const std::int64_t start = hours_from_epoch(year, 1, 1, 0);
  const int n = hours_in_year(year);
  RawSeries s;
  s.region = label;
  s.hours.resize(n);
  s.values.resize(n);
  for (int t = 0; t < n; ++t) {
    s.hours[t] = start + t;
    const int day = t / 24;
    const bool off =
        day >= window_start_day && day < window_start_day + window_days;
    s.values[t] = off ? 0.0 : rated_mw;
  }
  return s;
}

std::vector<Vec> synthetic_canonical_years(int n_years, double mean,
                                           unsigned seed) {
  std::vector<Vec> out;
  RngStream rng(seed);
  for (int y = 0; y < n_years; ++y) {
    Vec v(kStepsPerYear);
    const double a1 = 0.12 + 0.03 * rng.normal();
    const double a2 = 0.06 + 0.02 * rng.normal();
    const double a3 = 0.08 + 0.02 * rng.normal();
    const double p1 = rng.uniform_angle() * 0.05;
    for (int t = 0; t < kStepsPerYear; ++t) {
      v[t] = mean * (1.0 + a1 * std::cos(2 * kPi * t / kStepsPerYear + p1) +
                     a2 * std::cos(2 * kPi * t / kHoursPerWeek) +
                     a3 * std::cos(2 * kPi * t / 24.0));
    }
    out.push_back(std::move(v));
  }
  return out;
}

FixtureFiles write_fixture_tree(const fs::path& dir,
                                const std::vector<int>& years,
                                double thermal_scale) {
  fs::create_directories(dir / "history" / "loads");
  fs::create_directories(dir / "history" / "nuclear");

  FixtureFiles files;
  files.network = dir / "network.json";
  files.history = dir / "history";
  {
    std::ofstream out(files.network);
    out << two_country_grid_json(thermal_scale);
  }

  // Fitting years cover the requested reference years plus one year before
  // the first (so every country has at least two canonical years).
  std::vector<int> all_years = years;
  all_years.insert(all_years.begin(), years.front() - 1);

  auto write_raw = [](const fs::path& file, const RawSeries& s) {
    std::ofstream out(file);
    out << "timestamp," << s.region << "\n";
    char buf[48];
    for (std::size_t t = 0; t < s.hours.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "%.10g", s.values[static_cast<Eigen::Index>(t)]);
      out << iso_from_hours(s.hours[t]) << "," << buf << "\n";
    }
  };

  for (const std::string country : {"AA", "BB"}) {
    // One continuous multi-year series per country.
    RawSeries all;
    all.region = country;
    const double mean_mw = country == "AA" ? 1100.0 : 700.0;
    std::vector<double> values;
    for (int y : all_years) {
      const RawSeries s = national_load_history(country, y, mean_mw);
      all.hours.insert(all.hours.end(), s.hours.begin(), s.hours.end());
      for (Eigen::Index i = 0; i < s.values.size(); ++i)
        values.push_back(s.values[i]);
    }
    all.values =
        Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
    write_raw(dir / "history" / "loads" / (country + ".csv"), all);
  }
  {
    RawSeries all;
    all.region = "g_nuc";
    std::vector<double> values;
    for (int y : all_years) {
      const RawSeries s = nuclear_history("g_nuc", y, 600.0, 190, 28);
      all.hours.insert(all.hours.end(), s.hours.begin(), s.hours.end());
      for (Eigen::Index i = 0; i < s.values.size(); ++i)
        values.push_back(s.values[i]);
    }
    all.values =
        Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
    write_raw(dir / "history" / "nuclear" / "g_nuc.csv", all);
  }
  {
    std::ofstream out(dir / "history" / "exports.csv");
    out << "year,AA,BB\n";
    for (int y : years) out << y << ",50,-50\n";
  }
  return files;
}

Table flat_load_table(const Network& net, int horizon, double total) {
  Table t;
  const auto buses = net.load_bus_indices();
  t.values.resize(horizon, static_cast<Eigen::Index>(buses.size()));
  double weight_sum = 0.0;
  for (int b : buses) weight_sum += net.buses[b].load_weight;
  for (std::size_t c = 0; c < buses.size(); ++c) {
    t.labels.push_back(net.buses[buses[c]].id);
    t.values.col(static_cast<Eigen::Index>(c))
        .setConstant(total * net.buses[buses[c]].load_weight / weight_sum);
  }
  return t;
}

Table wavy_load_table(const Network& net, int horizon, double mean_total,
                      double rel_amplitude) {
  Table t = flat_load_table(net, horizon, mean_total);
  Vec shape(horizon);
  for (int s = 0; s < horizon; ++s) {
    shape[s] = 1.0 + rel_amplitude * (0.5 * std::cos(2 * kPi * s / 168.0) +
                                      0.35 * std::cos(2 * kPi * (s - 17) / 24.0) +
                                      0.15 * std::cos(2 * kPi * s / 8736.0));
  }
  for (int c = 0; c < t.cols(); ++c)
    t.values.col(c) = t.values.col(c).cwiseProduct(shape);
  return t;
}

std::map<std::string, AnnualSeries> fixture_nuclear_profiles(int horizon) {
  AnnualSeries s;
  s.region = "g_nuc";
  const int n = std::max(horizon, kStepsPerYear);
  s.values.resize(n);
  for (int t = 0; t < n; ++t) {
    const int day = (t / 24) % kDaysPerYear;
    s.values[t] = (day >= 190 && day < 218) ? 0.0 : 6.0;
  }
  return {{"g_nuc", std::move(s)}};
}

double fixture_expected_dispatchable() {
  double total = 0.0;
  for (const auto& g : generator_specs())
    if (std::string(g.type) != "nuclear") total += g.rated * g.availability;
  return total;
}

void rebalance_loads(Table& loads, const Network& net,
                     const std::map<std::string, AnnualSeries>& nuclear) {
  double expected = 0.0;
  for (const auto& g : net.generators)
    if (g.dispatchable()) expected += g.availability * g.rated_power;
  Vec nuclear_total = Vec::Zero(loads.rows());
  for (const auto& [label, prof] : nuclear)
    nuclear_total += prof.values.head(loads.rows());
  const double target = expected + nuclear_total.mean();
  const double current = loads.row_sums().mean();
  loads.values *= target / current;
}

fs::path make_temp_dir(const std::string& hint) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("gridgen_test_" + hint + "_" +
                        std::to_string(::getpid()) + "_" +
                        std::to_string(++counter));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace gridgen::testing
