#include "gridgen/pipeline.hpp"

#include "gridgen/dc_flow.hpp"
#include "gridgen/dispatch.hpp"
#include "gridgen/loads.hpp"
#include "gridgen/log.hpp"
#include "gridgen/version.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fcntl.h>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace gridgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail_input("not a boolean: '" + s + "'");
}

class ScopedLock {
 public:
  explicit ScopedLock(const fs::path& target) : path_(target.string() + ".lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      fail_input("output directory is locked by another run (" + path_ +
                 "); remove the lock file if that run is gone");
    ::close(fd);
  }
  ~ScopedLock() { ::unlink(path_.c_str()); }

 private:
  std::string path_;
};

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>* sink) : sink_(sink) {}
  void start(const std::string& name) {
    stop();
    name_ = name;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    if (name_.empty()) return;
    const auto dt = std::chrono::steady_clock::now() - t0_;
    (*sink_)[name_] =
        std::chrono::duration_cast<std::chrono::duration<double>>(dt).count();
    name_.clear();
  }

 private:
  std::map<std::string, double>* sink_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace

PipelineConfig parse_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open config " + file.string());
  PipelineConfig c;
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail_input(file.string() + ":" + std::to_string(lineno) +
                 ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      fail_input(file.string() + ": duplicate key '" + key + "'");
    if (key == "network") c.network_file = value;
    else if (key == "history") c.history_dir = value;
    else if (key == "output") c.output_dir = value;
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "years") c.years = parse_int_list(value);
    else if (key == "fit_years") c.fit_years = parse_int_list(value);
    else if (key == "replicas") c.replicas = std::stoi(value);
    else if (key == "rho_target") c.rho_target = std::stod(value);
    else if (key == "noise_scale") c.noise_scale = std::stod(value);
    else if (key == "sparsify_threshold") c.sparsify_threshold = std::stod(value);
    else if (key == "small_gen_threshold") c.small_gen_threshold = std::stod(value);
    else if (key == "max_gap_run") c.max_gap_run = std::stoi(value);
    else if (key == "clamp_negative_loads") c.clamp_negative_loads = parse_bool(value);
    else fail_input(file.string() + ": unknown key '" + key + "'");
  }
  if (c.network_file.empty()) fail_input("config lacks 'network'");
  if (c.history_dir.empty()) fail_input("config lacks 'history'");
  if (c.output_dir.empty()) fail_input("config lacks 'output'");
  if (c.years.empty()) fail_input("config lacks 'years'");
  if (c.replicas < 1) fail_input("replicas must be >= 1");
  return c;
}

std::string config_to_text(const PipelineConfig& c) {
  std::ostringstream os;
  os << "[paths]\n";
  os << "network = " << c.network_file.string() << "\n";
  os << "history = " << c.history_dir.string() << "\n";
  os << "output = " << c.output_dir.string() << "\n\n";
  os << "[run]\n";
  os << "seed = " << c.seed << "\n";
  os << "years = ";
  for (std::size_t i = 0; i < c.years.size(); ++i)
    os << (i ? ", " : "") << c.years[i];
  os << "\n";
  os << "replicas = " << c.replicas << "\n\n";
  os << "[model]\n";
  os << "rho_target = " << c.rho_target << "\n";
  os << "noise_scale = " << c.noise_scale << "\n";
  os << "sparsify_threshold = " << c.sparsify_threshold << "\n";
  os << "small_gen_threshold = " << c.small_gen_threshold << "\n";
  os << "max_gap_run = " << c.max_gap_run << "\n";
  os << "clamp_negative_loads = " << (c.clamp_negative_loads ? "true" : "false")
     << "\n";
  if (!c.fit_years.empty()) {
    os << "fit_years = ";
    for (std::size_t i = 0; i < c.fit_years.size(); ++i)
      os << (i ? ", " : "") << c.fit_years[i];
    os << "\n";
  }
  return os.str();
}

HistoryData read_history(const fs::path& history_dir, int max_gap_run) {
  HistoryData h;
  const fs::path loads_dir = history_dir / "loads";
  if (!fs::is_directory(loads_dir))
    fail_input("history directory lacks loads/ (" + loads_dir.string() + ")");
  for (const auto& entry : fs::directory_iterator(loads_dir)) {
    if (entry.path().extension() != ".csv") continue;
    RawSeries s = read_raw_series_csv(entry.path());
    s.region = entry.path().stem().string();
    h.national_loads[s.region] = fill_gaps(s, max_gap_run);
  }
  if (h.national_loads.empty()) fail_input("no national load files found");

  const fs::path nuclear_dir = history_dir / "nuclear";
  if (fs::is_directory(nuclear_dir)) {
    for (const auto& entry : fs::directory_iterator(nuclear_dir)) {
      if (entry.path().extension() != ".csv") continue;
      RawSeries s = read_raw_series_csv(entry.path());
      s.region = entry.path().stem().string();
      h.nuclear_units[s.region] = fill_gaps(s, max_gap_run);
    }
  }

  const fs::path exports_file = history_dir / "exports.csv";
  if (fs::exists(exports_file)) {
    std::ifstream in(exports_file);
    std::string line;
    if (!std::getline(in, line)) fail_input("empty exports.csv");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> headers;
    {
      std::stringstream hs(line);
      std::string cell;
      while (std::getline(hs, cell, ',')) headers.push_back(trim(cell));
    }
    if (headers.empty() || headers[0] != "year")
      fail_input("exports.csv must start with a 'year' column");
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      std::stringstream rs(line);
      std::string cell;
      std::size_t col = 0;
      int year = 0;
      while (std::getline(rs, cell, ',')) {
        if (col == 0) year = std::stoi(trim(cell));
        else if (col < headers.size())
          h.exports_mw[year][headers[col]] = std::stod(trim(cell));
        ++col;
      }
    }
  }
  return h;
}

namespace {

std::vector<int> covered_years(const RawSeries& s) {
  std::vector<int> out;
  if (s.hours.empty()) return out;
  // Probe every calendar year the series could cover.
  for (int y = 1970; y <= 2200; ++y) {
    const std::int64_t start = hours_from_epoch(y, 1, 1, 0);
    if (start < s.hours.front()) continue;
    if (start + kStepsPerYear > s.hours.back() + 1) break;
    out.push_back(y);
  }
  return out;
}

}  // namespace

IngestResult ingest_history(const HistoryData& history, const Network& net,
                            const std::vector<int>& reference_years) {
  IngestResult r;
  for (const auto& [country, raw] : history.national_loads) {
    for (int y : covered_years(raw)) {
      AnnualSeries a = canonicalize_year(raw, y);
      a.values /= net.base_power;  // MW to per-unit
      r.loads[country][y] = std::move(a);
    }
    if (r.loads[country].size() < 2)
      log_warn("country " + country + " has fewer than two canonical years");
  }
  for (const auto& [label, raw] : history.nuclear_units) {
    for (int y : covered_years(raw)) {
      AnnualSeries a = canonicalize_year(raw, y);
      a.values /= net.base_power;
      r.nuclear[label][y] = std::move(a);
    }
  }
  for (const auto& [year, by_country] : history.exports_mw)
    for (const auto& [country, mw] : by_country)
      r.exports[year][country] = mw / net.base_power;

  for (int y : reference_years) {
    std::map<std::string, AnnualSeries> nuclear_profiles;
    for (const auto& [label, years] : r.nuclear) {
      const auto it = years.find(y);
      if (it != years.end()) nuclear_profiles[label] = it->second;
    }
    const std::map<std::string, double> production =
        expected_production_by_country(net, nuclear_profiles);
    std::map<std::string, double> raw_loads;
    for (const auto& [country, years] : r.loads) {
      const auto it = years.find(y);
      if (it == years.end())
        fail_input("country " + country + " has no canonical load for year " +
                   std::to_string(y));
      raw_loads[country] = it->second.values.mean();
    }
    std::map<std::string, double> exports;
    const auto ee = r.exports.find(y);
    if (ee != r.exports.end()) exports = ee->second;
    r.balance[y] = compute_scaling_factors(production, exports, raw_loads);
  }
  return r;
}

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail_input("cannot open " + file.string() + " for checksumming");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string RunManifest::to_json() const {
  json j;
  j["version"] = version;
  j["config"]["network"] = config.network_file.string();
  j["config"]["history"] = config.history_dir.string();
  j["config"]["output"] = config.output_dir.string();
  j["config"]["seed"] = config.seed;
  j["config"]["years"] = config.years;
  j["config"]["fit_years"] = config.fit_years;
  j["config"]["replicas"] = config.replicas;
  j["config"]["rho_target"] = config.rho_target;
  j["config"]["noise_scale"] = config.noise_scale;
  j["config"]["sparsify_threshold"] = config.sparsify_threshold;
  j["config"]["small_gen_threshold"] = config.small_gen_threshold;
  j["config"]["max_gap_run"] = config.max_gap_run;
  j["config"]["clamp_negative_loads"] = config.clamp_negative_loads;
  j["checksums"] = file_checksums;
  j["stage_seconds"] = stage_seconds;
  return j.dump(2);
}

namespace {

void load_manifest_config(const fs::path& dir, PipelineConfig* into) {
  const fs::path file = dir / "manifest.json";
  if (!fs::exists(file)) return;
  std::ifstream in(file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail_input("unreadable manifest " + file.string() + ": " + e.what());
  }
  if (j.contains("config")) {
    const auto& c = j["config"];
    if (c.contains("seed")) into->seed = c["seed"].get<std::uint64_t>();
    if (c.contains("rho_target")) into->rho_target = c["rho_target"].get<double>();
    if (c.contains("noise_scale")) into->noise_scale = c["noise_scale"].get<double>();
    if (c.contains("small_gen_threshold"))
      into->small_gen_threshold = c["small_gen_threshold"].get<double>();
  }
}

Network prepare_network(const fs::path& file, double small_gen_threshold) {
  Network net = parse_network_file(file);
  net = remove_small_generators(net, small_gen_threshold);
  net = restrict_to_largest_component(net);
  const NetworkReport report = validate_network(net);
  log_info("network: " + std::to_string(net.buses.size()) + " buses, " +
           std::to_string(net.lines.size()) + " lines, " +
           std::to_string(net.generators.size()) + " generators");
  if (!report.connected)
    fail_input("network is still disconnected after reduction");
  return net;
}

}  // namespace

RunManifest run_generate(const PipelineConfig& config) {
  if (fs::exists(config.output_dir))
    fail_input("output directory " + config.output_dir.string() +
               " already exists");
  fs::create_directories(config.output_dir.parent_path().empty()
                             ? fs::path(".")
                             : config.output_dir.parent_path());
  const ScopedLock lock(config.output_dir);
  const fs::path tmp = config.output_dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  RunManifest manifest;
  manifest.version = kVersion;
  manifest.config = config;
  StageTimer timer(&manifest.stage_seconds);

  timer.start("network");
  const Network net =
      prepare_network(config.network_file, config.small_gen_threshold);

  timer.start("ingest");
  const HistoryData history = read_history(config.history_dir, config.max_gap_run);
  const IngestResult ingest = ingest_history(history, net, config.years);

  timer.start("fit");
  std::map<std::string, FourierEnsemble> ensembles;
  for (const std::string& country : net.countries()) {
    bool has_load = false;
    for (const auto& b : net.buses)
      if (b.country == country && b.load_weight > 0.0) has_load = true;
    if (!has_load) continue;
    const auto it = ingest.loads.find(country);
    if (it == ingest.loads.end())
      fail_input("no historical loads for country " + country);
    std::vector<AnnualSeries> years;
    for (const auto& [y, s] : it->second) {
      if (!config.fit_years.empty() &&
          std::find(config.fit_years.begin(), config.fit_years.end(), y) ==
              config.fit_years.end())
        continue;
      years.push_back(s);
    }
    FourierEnsemble ens = fit_ensemble(years, country);
    sparsify_covariance(ens, config.sparsify_threshold);
    const double k = tune_correlation(ens, config.rho_target);
    factorize(ens);
    log_info("ensemble " + country + ": " +
             std::to_string(years.size()) + " years, sigma scaled by " +
             std::to_string(k));
    write_ensemble(tmp / ("ensemble_" + country + ".txt"), ens);
    ensembles.emplace(country, std::move(ens));
  }

  for (int year : config.years) {
    const auto be = ingest.balance.find(year);
    if (be == ingest.balance.end())
      fail_input("no balance records for year " + std::to_string(year));
    std::map<std::string, double> production, exports;
    for (const auto& rec : be->second) {
      production[rec.country] = rec.production;
      exports[rec.country] = rec.export_mean;
    }
    const auto targets = balanced_mean_targets(production, exports);

    std::map<std::string, AnnualSeries> nuclear_profiles;
    for (const auto& [label, years] : ingest.nuclear) {
      const auto it = years.find(year);
      if (it != years.end()) nuclear_profiles[label] = it->second;
    }

    for (int k = 1; k <= config.replicas; ++k) {
      const std::string label = std::to_string(year) + "_" + std::to_string(k);
      log_info("generating " + label);

      timer.start("sample_" + label);
      DisaggregateOptions dopt;
      dopt.seed = config.seed;
      dopt.replica = label;
      dopt.clamp_negative = config.clamp_negative_loads;
      const Table loads = disaggregate(net, ensembles, targets, dopt);

      timer.start("dispatch_" + label);
      DispatchOptions opt;
      opt.seed = config.seed;
      opt.replica = label;
      opt.noise_scale = config.noise_scale;
      const DispatchResult dispatched =
          dispatch_year(net, loads, nuclear_profiles, opt);

      timer.start("flows_" + label);
      const Table lines = flows_for_table(net, loads, dispatched.gens);

      timer.start("write_" + label);
      write_table_csv(tmp / ("loads_" + label + ".csv"), loads);
      write_table_csv(tmp / ("gens_" + label + ".csv"), dispatched.gens);
      write_table_csv(tmp / ("lines_" + label + ".csv"), lines);
      {
        std::ofstream rifs(tmp / ("dispatch_" + label + ".txt"));
        rifs << dispatched.report.to_text();
      }
    }
  }
  timer.stop();

  for (const auto& entry : fs::directory_iterator(tmp)) {
    if (entry.path().filename() == "manifest.json") continue;
    manifest.file_checksums[entry.path().filename().string()] =
        sha256_file(entry.path());
  }
  {
    const fs::path mtmp = tmp / "manifest.json.part";
    std::ofstream out(mtmp);
    out << manifest.to_json() << "\n";
    out.close();
    fs::rename(mtmp, tmp / "manifest.json");
  }
  fs::rename(tmp, config.output_dir);
  return manifest;
}

TableTriplet read_tables(const fs::path& dir, const std::string& label,
                         const Network& net) {
  TableTriplet t;
  t.loads = read_table_csv(dir / ("loads_" + label + ".csv"));
  t.gens = read_table_csv(dir / ("gens_" + label + ".csv"));
  t.lines = read_table_csv(dir / ("lines_" + label + ".csv"));

  for (const auto& h : t.loads.labels)
    if (net.bus_index(h) < 0)
      fail_input("loads_" + label + ".csv: header '" + h +
                 "' is not a bus label");
  {
    std::set<std::string> gen_labels;
    for (const auto& g : net.generators) gen_labels.insert(g.id);
    for (const auto& h : t.gens.labels)
      if (!gen_labels.count(h))
        fail_input("gens_" + label + ".csv: header '" + h +
                   "' is not a generator label");
    if (t.gens.labels.size() != gen_labels.size())
      fail_input("gens_" + label + ".csv: expected " +
                 std::to_string(gen_labels.size()) + " generator columns");
  }
  {
    std::set<std::string> line_labels;
    for (const auto& l : net.lines) line_labels.insert(l.id);
    for (const auto& h : t.lines.labels)
      if (!line_labels.count(h))
        fail_input("lines_" + label + ".csv: header '" + h +
                   "' is not a line label");
    if (t.lines.labels.size() != line_labels.size())
      fail_input("lines_" + label + ".csv: expected " +
                 std::to_string(line_labels.size()) + " line columns");
  }
  return t;
}

std::string ValidationSummary::to_text() const {
  std::ostringstream os;
  os << "pearson mean:            " << pearson_mean << " (target "
     << pearson_target << ")\n";
  os << "loading fractions:       ";
  for (double f : loading_fractions) os << f << " ";
  os << "\n";
  os << "balance residual:        " << balance_residual << "\n";
  os << "availability residual:   " << availability_residual << "\n";
  os << "ramp residual:           " << ramp_residual << "\n";
  os << "bounds residual:         " << bounds_residual << "\n";
  os << "line redundancy error:   " << line_redundancy_error << "\n";
  os << "verdict:                 " << (passed ? "pass" : "FAIL") << "\n";
  return os.str();
}

ValidationSummary run_validate(const fs::path& output_dir,
                               const fs::path& network_file,
                               const fs::path& history_dir) {
  PipelineConfig cfg;  // defaults + manifest overrides
  load_manifest_config(output_dir, &cfg);
  const Network net = prepare_network(network_file, cfg.small_gen_threshold);

  // Discover triplets.
  std::vector<std::string> labels;
  for (const auto& entry : fs::directory_iterator(output_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("loads_", 0) == 0 && entry.path().extension() == ".csv") {
      const std::string label = name.substr(6, name.size() - 10);
      if (!fs::exists(output_dir / ("gens_" + label + ".csv")) ||
          !fs::exists(output_dir / ("lines_" + label + ".csv")))
        fail_input("incomplete triplet for label '" + label + "'");
      labels.push_back(label);
    }
  }
  if (labels.empty()) fail_input("no output triplets found in " +
                                 output_dir.string());
  std::sort(labels.begin(), labels.end());

  const fs::path vdir = output_dir / "validation";
  fs::create_directories(vdir);

  ValidationSummary sum;
  sum.pearson_target = cfg.rho_target;

  // Pearson histogram accumulator.
  const int nbins = 40;
  std::vector<std::int64_t> hist(nbins, 0);
  double pearson_acc = 0.0;
  std::int64_t pearson_count = 0;

  const auto matrices = build_matrices(net);
  std::vector<double> thresholds = {0.8, 1.0, 1.2};
  std::vector<double> frac_acc(thresholds.size(), 0.0);

  std::map<std::string, Vec> type_aggregates;  // "<CC>_<type>_<label>"

  for (const std::string& label : labels) {
    const TableTriplet t = read_tables(output_dir, label, net);

    // Pairwise correlations within each country (capped per country).
    std::map<std::string, std::vector<int>> cols_by_country;
    for (int c = 0; c < t.loads.cols(); ++c) {
      const int b = net.bus_index(t.loads.labels[c]);
      if (b >= 0 && !net.buses[b].country.empty())
        cols_by_country[net.buses[b].country].push_back(c);
    }
    for (const auto& [country, cols] : cols_by_country) {
      std::int64_t budget = 2000;
      for (std::size_t i = 0; i < cols.size() && budget > 0; ++i) {
        for (std::size_t j = i + 1; j < cols.size() && budget > 0; ++j) {
          const double r =
              pearson(t.loads.values.col(cols[i]), t.loads.values.col(cols[j]));
          pearson_acc += r;
          ++pearson_count;
          --budget;
          const int bin = std::clamp(
              static_cast<int>((r + 1.0) / 2.0 * nbins), 0, nbins - 1);
          ++hist[bin];
        }
      }
    }

    // Line loading fractions.
    const auto fr =
        loading_fractions(t.lines.values, matrices.thermal_limit, thresholds);
    for (std::size_t i = 0; i < fr.size(); ++i) frac_acc[i] += fr[i];

    // Redundancy: recompute flows from the injections.
    const Table recomputed = flows_for_table(net, t.loads, t.gens, 1e-5);
    double max_diff = 0.0;
    for (int c = 0; c < t.lines.cols(); ++c) {
      const int rc = recomputed.column(t.lines.labels[c]);
      max_diff = std::max(max_diff, (t.lines.values.col(c) -
                                     recomputed.values.col(rc))
                                        .cwiseAbs()
                                        .maxCoeff());
    }
    sum.line_redundancy_error = std::max(sum.line_redundancy_error, max_diff);

    // Constraint residuals via the dispatch verifier; the table's own
    // nuclear columns serve as the exogenous profiles.
    std::map<std::string, AnnualSeries> nuclear_profiles;
    for (const auto& g : net.generators) {
      if (g.dispatchable()) continue;
      const int c = t.gens.column(g.id);
      if (c < 0) fail_input("gens table lacks nuclear column '" + g.id + "'");
      AnnualSeries prof;
      prof.values = t.gens.values.col(c);
      prof.region = g.id;
      nuclear_profiles[g.id] = std::move(prof);
    }
    DispatchOptions dopt;
    dopt.seed = cfg.seed;
    dopt.replica = label;
    dopt.noise_scale = cfg.noise_scale;
    const DispatchProblem problem =
        build_dispatch_problem(net, t.loads, nuclear_profiles, dopt);
    const VerifyReport verify = verify_solution(problem, t.gens);
    sum.balance_residual = std::max(sum.balance_residual, verify.balance);
    sum.availability_residual =
        std::max(sum.availability_residual, verify.availability);
    sum.ramp_residual = std::max(sum.ramp_residual, verify.ramp);
    sum.bounds_residual = std::max(sum.bounds_residual, verify.bounds);

    // Production aggregated by country and type.
    for (int c = 0; c < t.gens.cols(); ++c) {
      const Generator* gen = nullptr;
      for (const auto& g : net.generators)
        if (g.id == t.gens.labels[c]) gen = &g;
      if (!gen) continue;
      const std::string country = net.buses[gen->bus].country;
      const std::string key =
          country + "_" + to_string(gen->type) + "_" + label;
      auto it = type_aggregates.find(key);
      if (it == type_aggregates.end())
        it = type_aggregates.emplace(key, Vec::Zero(t.gens.values.rows())).first;
      it->second += t.gens.values.col(c);
    }
  }

  sum.pearson_mean = pearson_count ? pearson_acc / pearson_count : 0.0;
  for (double& f : frac_acc) f /= static_cast<double>(labels.size());
  sum.loading_fractions = frac_acc;

  // Plot-ready summaries.
  {
    std::ofstream out(vdir / "pearson_hist.csv");
    out << "bin_low,bin_high,count\n";
    for (int b = 0; b < nbins; ++b)
      out << (-1.0 + 2.0 * b / nbins) << "," << (-1.0 + 2.0 * (b + 1) / nbins)
          << "," << hist[b] << "\n";
  }
  {
    std::ofstream out(vdir / "loading_fractions.csv");
    out << "threshold,fraction\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      out << thresholds[i] << "," << frac_acc[i] << "\n";
  }
  // Historical per-type aggregates for side-by-side comparison, when given.
  std::map<std::string, std::map<int, AnnualSeries>> hist_types;
  if (!history_dir.empty() && fs::is_directory(history_dir / "types")) {
    for (const auto& entry : fs::directory_iterator(history_dir / "types")) {
      if (entry.path().extension() != ".csv") continue;
      RawSeries s = read_raw_series_csv(entry.path());
      s.region = entry.path().stem().string();
      const RawSeries filled = fill_gaps(s, cfg.max_gap_run);
      for (int y = 1970; y <= 2200; ++y) {
        try {
          AnnualSeries a = canonicalize_year(filled, y);
          a.values /= net.base_power;
          hist_types[s.region][y] = std::move(a);
        } catch (const Error&) {
          break;
        }
      }
    }
  }
  for (const auto& [key, series] : type_aggregates) {
    std::ofstream out(vdir / ("aggregate_" + key + ".csv"));
    const auto pos = key.rfind('_');
    const std::string base = key.substr(0, key.rfind('_', pos - 1));
    out << "synthetic";
    const AnnualSeries* hist_series = nullptr;
    const auto ht = hist_types.find(base);
    if (ht != hist_types.end() && !ht->second.empty())
      hist_series = &ht->second.begin()->second;
    if (hist_series) out << ",historical";
    out << "\n";
    char buf[64];
    for (Eigen::Index i = 0; i < series.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", series[i]);
      out << buf;
      if (hist_series) {
        std::snprintf(buf, sizeof(buf), "%.12g", hist_series->values[i]);
        out << "," << buf;
      }
      out << "\n";
    }
  }

  const bool monotone = frac_acc.size() < 2 ||
                        (frac_acc[0] >= frac_acc[1] && frac_acc[1] >= frac_acc[2]);
  sum.passed = std::abs(sum.pearson_mean - sum.pearson_target) <= 0.03 &&
               sum.balance_residual < 1e-6 && sum.availability_residual < 1e-6 &&
               sum.ramp_residual < 1e-8 && sum.bounds_residual < 1e-8 &&
               sum.line_redundancy_error < 1e-6 && monotone;

  {
    std::ofstream out(vdir / "report.txt");
    out << sum.to_text();
  }
  return sum;
}

}  // namespace gridgen
