#pragma once

#include "gridgen/balance.hpp"
#include "gridgen/common.hpp"
#include "gridgen/ensemble.hpp"
#include "gridgen/grid_model.hpp"
#include "gridgen/tables.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gridgen {

struct PipelineConfig {
  std::filesystem::path network_file;
  std::filesystem::path history_dir;   // loads/, nuclear/, exports.csv
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  double rho_target = 0.8;
  double noise_scale = 1.0;
  double sparsify_threshold = 1e-3;
  double small_gen_threshold = 0.5;   // per-unit (50 MW)
  int max_gap_run = 24;
  bool clamp_negative_loads = false;
  std::vector<int> years;             // reference-year labels
  int replicas = 1;
  std::vector<int> fit_years;         // years the ensembles are fitted from;
                                      // empty = every year found on disk
};

// "key = value" lines with optional [section] headers (sections are
// flattened; keys must be unique). '#' starts a comment.
PipelineConfig parse_config(const std::filesystem::path& file);
std::string config_to_text(const PipelineConfig& config);

// History directory layout:
//   loads/<CC>.csv      hourly national loads, MW, multi-year
//   nuclear/<label>.csv hourly per-unit-generator output, MW, multi-year
//   exports.csv         rows per year, columns "year,<CC>,<CC>,..." in MW
struct HistoryData {
  std::map<std::string, RawSeries> national_loads;   // by country
  std::map<std::string, RawSeries> nuclear_units;    // by generator label
  std::map<int, std::map<std::string, double>> exports_mw;  // year -> country
};

HistoryData read_history(const std::filesystem::path& history_dir,
                         int max_gap_run);

struct IngestResult {
  // canonical per-unit series keyed by (country, year)
  std::map<std::string, std::map<int, AnnualSeries>> loads;
  // canonical per-unit nuclear profiles keyed by (label, year)
  std::map<std::string, std::map<int, AnnualSeries>> nuclear;
  std::map<int, std::map<std::string, double>> exports;  // per-unit
  std::map<int, std::vector<BalanceRecord>> balance;     // per reference year
};

// Canonicalizes the history to per-unit annual series and computes the
// balance records for every requested reference year.
IngestResult ingest_history(const HistoryData& history, const Network& net,
                            const std::vector<int>& reference_years);

struct RunManifest {
  std::string version;
  PipelineConfig config;
  std::map<std::string, std::string> file_checksums;  // sha-256 hex
  std::map<std::string, double> stage_seconds;
  std::string to_json() const;
};

// Full workflow: parse + prepare the network, ingest, fit, sample,
// dispatch, flows; writes loads_<year>_<k>.csv, gens_<year>_<k>.csv,
// lines_<year>_<k>.csv plus manifest.json. Everything lands in a temporary
// sibling of output_dir that is renamed into place on success; concurrent
// runs against the same output directory are rejected through a lock file.
RunManifest run_generate(const PipelineConfig& config);

// Reads one consistent (loads, gens, lines) triplet, checking headers
// against the network labels and row counts against the canonical length.
struct TableTriplet {
  Table loads;
  Table gens;
  Table lines;
};
TableTriplet read_tables(const std::filesystem::path& dir,
                         const std::string& label, const Network& net);

struct ValidationSummary {
  double pearson_mean = 0.0;
  double pearson_target = 0.0;
  std::vector<double> loading_fractions;  // at 0.8 / 1.0 / 1.2
  double balance_residual = 0.0;
  double availability_residual = 0.0;
  double ramp_residual = 0.0;
  double bounds_residual = 0.0;
  double line_redundancy_error = 0.0;  // |published - recomputed| flows
  bool passed = false;
  std::string to_text() const;
};

// Validates every triplet in the directory; writes plot-ready CSV summaries
// (Pearson histogram, loading fractions, per-country per-type aggregates)
// next to a report.txt inside <output>/validation/.
ValidationSummary run_validate(const std::filesystem::path& output_dir,
                               const std::filesystem::path& network_file,
                               const std::filesystem::path& history_dir = {});

std::string sha256_file(const std::filesystem::path& file);

}  // namespace gridgen
