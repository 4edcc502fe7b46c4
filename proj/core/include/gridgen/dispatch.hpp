#pragma once

#include "gridgen/common.hpp"
#include "gridgen/cost_noise.hpp"
#include "gridgen/grid_model.hpp"
#include "gridgen/qp.hpp"
#include "gridgen/series.hpp"
#include "gridgen/tables.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridgen {

struct DispatchOptions {
  std::uint64_t seed = 0;
  std::string replica = "1";  // replica label, e.g. "2016_1"
  double noise_scale = 1.0;
  double qp_tolerance = 1e-9;
  // Allowed mismatch between the annual mean load and the expected
  // production before the problem is declared inconsistent.
  double balance_tolerance = 1e-6;
};

struct DispatchUnit {
  std::string label;
  int bus = -1;
  double rated = 0.0;
  double availability = 0.0;
  std::optional<double> ramp;  // per-unit per hour
};

// Immutable data of the yearly dispatch optimization: the hourly objective
// pieces (flow-penalty quadratic, flow-penalty linear term from the fixed
// injections, cost noise) plus the constraint data. Horizon must be a
// multiple of one week.
struct DispatchProblem {
  std::vector<DispatchUnit> units;          // dispatchable generators
  std::vector<std::string> gen_labels;      // all generators, network order
  std::vector<int> unit_of_gen;             // index into units, -1 = nuclear
  std::vector<std::string> nuclear_labels;
  Mat nuclear;                              // horizon x nuclear_labels.size()
  Vec net_load;       // horizon; sum loads - sum nuclear, mean-corrected
  Vec loads_total;    // horizon; raw row sums of the load table
  Mat noise;          // horizon x units
  Mat lin_flow;       // horizon x units; response' * W * phi0 per step
  Mat quad;           // units x units; response' * W * response
  Vec flow_const;     // horizon; phi0' * W * phi0 per step
  int horizon = 0;
  double applied_correction = 0.0;  // uniform shift used to close the balance

  int n_units() const { return static_cast<int>(units.size()); }
  int n_weeks() const { return horizon / kHoursPerWeek; }
  Vec rated() const;
  Vec availability_targets() const;  // A_i * rated_i
};

DispatchProblem build_dispatch_problem(
    const Network& net, const Table& loads,
    const std::map<std::string, AnnualSeries>& nuclear_profiles,
    const DispatchOptions& options);

// Hourly-objective value of a candidate schedule (horizon x units):
// flow penalty including its schedule-independent part, plus noise cost.
double schedule_objective(const DispatchProblem& p, const Mat& output);

// The constant schedule P_i(t) = A_i * rated_i. Valid only when the net
// load is flat; throws when any step's balance deviates beyond tolerance.
Mat feasible_point(const DispatchProblem& p, double tolerance = 1e-6);
// Same schedule without the feasibility check, for objective comparisons.
Mat constant_schedule(const DispatchProblem& p);
bool constant_schedule_feasible(const DispatchProblem& p,
                                double tolerance = 1e-6);

struct StageSolveInfo {
  double objective = 0.0;      // hourly-objective semantics
  double kkt_residual = 0.0;
  int iterations = 0;
  bool anchor_relaxed = false;
};

struct CoarseResult {
  Mat weekly_mean;  // weeks x units; divide by rated power for the
                    // per-week availability factors
  StageSolveInfo info;
};

// Week-averaged problem with the bounds tightened to
// [0.1 A_i, 0.9 + 0.1 A_i] * rated so no generator is parked at a bound
// for a whole week; the annual availability constraint is kept exact.
CoarseResult solve_coarse(const DispatchProblem& p, double qp_tol = 1e-9);

struct FineWeekResult {
  Mat output;  // 168 x units
  StageSolveInfo info;
};

// One week at hourly resolution under the weekly mean targets from the
// coarse stage. anchor_prev/anchor_next (optional, per unit) bound the
// first/last step against neighboring weeks through the ramp limits.
FineWeekResult solve_fine_week(const DispatchProblem& p, int week,
                               const Vec& weekly_target_mean,
                               const Vec* anchor_prev, const Vec* anchor_next,
                               double qp_tol = 1e-9);

// Whole horizon in one QP (periodic ramp wrap); for small instances and
// decomposition checks.
struct MonolithicResult {
  Mat output;  // horizon x units
  StageSolveInfo info;
};
MonolithicResult solve_monolithic(const DispatchProblem& p,
                                  double qp_tol = 1e-9);

struct DispatchReport {
  StageSolveInfo coarse;
  std::vector<StageSolveInfo> weeks;
  double objective = 0.0;                 // sum of week objectives
  double feasible_point_objective = 0.0;  // constant-schedule objective
  bool feasible_point_valid = false;      // constant schedule is feasible
  double balance_correction = 0.0;
  bool wrap_resolved = false;  // week 1 re-solved to close the ramp wrap
  int anchors_relaxed = 0;
  std::string to_text() const;
};

struct DispatchResult {
  Table gens;  // horizon x all generators (nuclear columns = profiles)
  DispatchReport report;
};

// Coarse stage, then the 52 fine weeks solved sequentially with ramp
// anchoring on the previous week; the year-end wrap is closed by one
// re-solve of the first week when violated.
DispatchResult dispatch_year(const Network& net, const Table& loads,
                             const std::map<std::string, AnnualSeries>& nuclear_profiles,
                             const DispatchOptions& options);

struct VerifyReport {
  double bounds = 0.0;        // max bound violation, per-unit
  double balance = 0.0;       // max per-step |production - load|
  double availability = 0.0;  // max |annual mean - A_i * rated|
  double ramp = 0.0;          // max ramp violation incl. periodic wrap
  double nuclear_mismatch = 0.0;
  double objective = 0.0;
  double max_violation() const;
  std::string to_text() const;
};

// Constraint residuals of a complete generator table, recomputed from the
// problem data only.
VerifyReport verify_solution(const DispatchProblem& p, const Table& gens);

}  // namespace gridgen
