#include "gridgen/dispatch.hpp"

#include "gridgen/dc_flow.hpp"
#include "gridgen/log.hpp"
#include "gridgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridgen {

Vec DispatchProblem::rated() const {
  Vec r(n_units());
  for (int i = 0; i < n_units(); ++i) r[i] = units[i].rated;
  return r;
}

Vec DispatchProblem::availability_targets() const {
  Vec t(n_units());
  for (int i = 0; i < n_units(); ++i)
    t[i] = units[i].availability * units[i].rated;
  return t;
}

DispatchProblem build_dispatch_problem(
    const Network& net, const Table& loads,
    const std::map<std::string, AnnualSeries>& nuclear_profiles,
    const DispatchOptions& options) {
  DispatchProblem p;
  p.horizon = loads.rows();
  if (p.horizon < kHoursPerWeek || p.horizon % kHoursPerWeek != 0)
    fail_input("dispatch horizon must be a positive multiple of " +
               std::to_string(kHoursPerWeek) + " steps");

  std::vector<int> load_bus(loads.cols());
  for (int c = 0; c < loads.cols(); ++c) {
    load_bus[c] = net.bus_index(loads.labels[c]);
    if (load_bus[c] < 0)
      fail_input("load column '" + loads.labels[c] + "' is not a bus label");
  }

  std::vector<int> unit_bus;
  for (const auto& g : net.generators) {
    p.gen_labels.push_back(g.id);
    if (g.dispatchable()) {
      p.unit_of_gen.push_back(static_cast<int>(p.units.size()));
      p.units.push_back({g.id, g.bus, g.rated_power, g.availability, g.ramp_limit});
      unit_bus.push_back(g.bus);
    } else {
      p.unit_of_gen.push_back(-1);
      p.nuclear_labels.push_back(g.id);
    }
  }
  if (p.units.empty()) fail_input("network has no dispatchable generators");

  p.nuclear.resize(p.horizon, static_cast<Eigen::Index>(p.nuclear_labels.size()));
  std::vector<int> nuclear_bus;
  {
    int col = 0;
    for (const auto& g : net.generators) {
      if (g.dispatchable()) continue;
      const auto it = nuclear_profiles.find(g.id);
      if (it == nuclear_profiles.end())
        fail_input("no profile provided for nuclear generator '" + g.id + "'");
      if (static_cast<int>(it->second.values.size()) < p.horizon)
        fail_input("nuclear profile '" + g.id + "' is shorter than the horizon");
      p.nuclear.col(col) = it->second.values.head(p.horizon);
      nuclear_bus.push_back(g.bus);
      ++col;
    }
  }

  p.loads_total = loads.row_sums();
  p.net_load = p.loads_total;
  if (p.nuclear.cols() > 0) p.net_load -= p.nuclear.rowwise().sum();

  // The balance and availability constraints are only jointly feasible when
  // the annual means agree; close the residual uniformly if it is small.
  const double expected = p.availability_targets().sum();
  const double residual = p.net_load.mean() - expected;
  const double scale = 1.0 + std::abs(expected);
  if (std::abs(residual) > options.balance_tolerance * scale)
    fail_input("annual mean load and expected production differ by " +
               std::to_string(residual) +
               " pu; re-normalize the loads before dispatching");
  p.net_load.array() -= residual;
  p.applied_correction = -residual;

  // Cost noise, one stream per generator so columns are reproducible in
  // isolation.
  p.noise.resize(p.horizon, p.n_units());
  for (int i = 0; i < p.n_units(); ++i) {
    RngStream::Key key(options.seed);
    key.add("noise").add(p.units[i].label).add(options.replica);
    RngStream rng(key);
    const CostNoise c = CostNoise::draw(rng, options.noise_scale);
    p.noise.col(i) = c.series(p.horizon);
  }

  // Flow-penalty pieces. W = diag(1 / thermal_limit).
  const auto matrices = build_matrices(net);
  const FlowOperator op(matrices);
  const Vec w = matrices.thermal_limit.cwiseInverse();
  const Mat response = op.response_columns(unit_bus);  // lines x units
  p.quad = response.transpose() * w.asDiagonal() * response;

  p.lin_flow.resize(p.horizon, p.n_units());
  p.flow_const.resize(p.horizon);
  Vec fixed_inj(net.buses.size());
  for (int t = 0; t < p.horizon; ++t) {
    fixed_inj.setZero();
    for (int c = 0; c < loads.cols(); ++c)
      fixed_inj[load_bus[c]] += loads.values(t, c);
    for (std::size_t c = 0; c < nuclear_bus.size(); ++c)
      fixed_inj[nuclear_bus[c]] -= p.nuclear(t, static_cast<Eigen::Index>(c));
    const Vec phi0 = op.response(fixed_inj);  // flows of (load - nuclear)
    const Vec wphi = w.cwiseProduct(phi0);
    p.lin_flow.row(t) = (response.transpose() * wphi).transpose();
    p.flow_const[t] = phi0.dot(wphi);
  }
  return p;
}

double schedule_objective(const DispatchProblem& p, const Mat& output) {
  if (output.rows() != p.horizon || output.cols() != p.n_units())
    fail_input("schedule has the wrong shape");
  double obj = p.flow_const.sum();
  for (int t = 0; t < p.horizon; ++t) {
    const Vec x = output.row(t).transpose();
    obj += x.dot(p.quad * x) - 2.0 * p.lin_flow.row(t).dot(output.row(t)) +
           p.noise.row(t).dot(output.row(t));
  }
  return obj;
}

Mat constant_schedule(const DispatchProblem& p) {
  Mat out(p.horizon, p.n_units());
  const Vec targets = p.availability_targets();
  for (int t = 0; t < p.horizon; ++t) out.row(t) = targets.transpose();
  return out;
}

bool constant_schedule_feasible(const DispatchProblem& p, double tolerance) {
  const double total = p.availability_targets().sum();
  return (p.net_load.array() - total).abs().maxCoeff() <= tolerance;
}

Mat feasible_point(const DispatchProblem& p, double tolerance) {
  const double total = p.availability_targets().sum();
  const Vec dev = (p.net_load.array() - total).abs();
  Eigen::Index worst = 0;
  const double max_dev = dev.maxCoeff(&worst);
  if (max_dev > tolerance)
    fail_input("constant schedule violates the balance at step " +
               std::to_string(worst) + " by " + std::to_string(max_dev) +
               " pu");
  return constant_schedule(p);
}

namespace {

// One stage = one QP over T steps of all dispatchable units. Units whose
// mean target sits on a bound are pinned by equality rows instead of
// keeping bound rows with empty interior.
struct StageData {
  int T = 0;
  Vec balance;      // length T
  Mat lin;          // T x units
  Mat noise;        // T x units
  Vec lower, upper; // per unit
  Vec target;       // per unit, required mean output
  bool ramp_steps = false;
  bool ramp_wrap = false;
  const Vec* anchor_prev = nullptr;  // per unit, first-step anchor values
  const Vec* anchor_next = nullptr;  // per unit, last-step anchor values
  double anchor_scale = 1.0;
  double const_term = 0.0;
};

struct StageResult {
  Mat output;  // T x units
  StageSolveInfo info;
};

StageResult solve_stage(const DispatchProblem& p, const StageData& sd,
                        double qp_tol) {
  const int nf = p.n_units();
  const int T = sd.T;
  const int n = nf * T;
  const double pin_eps = 1e-9;

  std::vector<char> pinned(nf, 0);
  Vec pin_value = Vec::Zero(nf);
  for (int i = 0; i < nf; ++i) {
    const double span = std::max(p.units[i].rated, 1e-12);
    if (sd.target[i] <= sd.lower[i] + pin_eps * span) {
      pinned[i] = 1;
      pin_value[i] = sd.lower[i];
    } else if (sd.target[i] >= sd.upper[i] - pin_eps * span) {
      pinned[i] = 1;
      pin_value[i] = sd.upper[i];
    }
  }

  // Stage targets must match the balance mean exactly for the equality
  // system to be consistent.
  {
    double target_sum = 0.0;
    for (int i = 0; i < nf; ++i)
      target_sum += pinned[i] ? pin_value[i] : sd.target[i];
    const double mismatch = sd.balance.mean() - target_sum;
    if (std::abs(mismatch) > 1e-4 * (1.0 + std::abs(target_sum)))
      fail_solver("stage balance and availability targets are inconsistent (" +
                  std::to_string(mismatch) + " pu)");
  }

  QpProblem qp;
  const auto idx = [nf](int t, int i) { return t * nf + i; };

  // Hessian: one dense flow block per step.
  {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(T) * nf * nf);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nf; ++j) {
          const double v = 2.0 * p.quad(i, j);
          if (v != 0.0) trip.emplace_back(idx(t, i), idx(t, j), v);
        }
    qp.H.resize(n, n);
    qp.H.setFromTriplets(trip.begin(), trip.end());
  }

  qp.g.resize(n);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < nf; ++i)
      qp.g[idx(t, i)] = -2.0 * sd.lin(t, i) + sd.noise(t, i);

  // Equalities: per-step balance (last row dropped; it is implied by the
  // availability rows once the targets match the balance mean), per-unit
  // mean output, and pinned units.
  {
    std::vector<Triplet> trip;
    std::vector<double> rhs;
    int row = 0;
    for (int t = 0; t + 1 < T; ++t) {
      for (int i = 0; i < nf; ++i) trip.emplace_back(row, idx(t, i), 1.0);
      rhs.push_back(sd.balance[t]);
      ++row;
    }
    for (int i = 0; i < nf; ++i) {
      if (pinned[i]) continue;
      for (int t = 0; t < T; ++t) trip.emplace_back(row, idx(t, i), 1.0);
      rhs.push_back(static_cast<double>(T) * sd.target[i]);
      ++row;
    }
    for (int i = 0; i < nf; ++i) {
      if (!pinned[i]) continue;
      for (int t = 0; t < T; ++t) {
        trip.emplace_back(row, idx(t, i), 1.0);
        rhs.push_back(pin_value[i]);
        ++row;
      }
    }
    qp.A.resize(row, n);
    qp.A.setFromTriplets(trip.begin(), trip.end());
    qp.b = Eigen::Map<Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  }

  // Inequalities: bounds for free units, ramp chains, anchors.
  {
    std::vector<Triplet> trip;
    std::vector<double> rhs;
    int row = 0;
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < nf; ++i) {
        if (pinned[i]) continue;
        trip.emplace_back(row, idx(t, i), 1.0);
        rhs.push_back(sd.upper[i]);
        ++row;
        trip.emplace_back(row, idx(t, i), -1.0);
        rhs.push_back(-sd.lower[i]);
        ++row;
      }
    }
    auto ramp_pair = [&](int ta, int tb, int i, double limit) {
      trip.emplace_back(row, idx(tb, i), 1.0);
      trip.emplace_back(row, idx(ta, i), -1.0);
      rhs.push_back(limit);
      ++row;
      trip.emplace_back(row, idx(tb, i), -1.0);
      trip.emplace_back(row, idx(ta, i), 1.0);
      rhs.push_back(limit);
      ++row;
    };
    for (int i = 0; i < nf; ++i) {
      if (pinned[i] || !p.units[i].ramp) continue;
      const double limit = *p.units[i].ramp;
      if (sd.ramp_steps)
        for (int t = 0; t + 1 < T; ++t) ramp_pair(t, t + 1, i, limit);
      if (sd.ramp_wrap && T > 1) ramp_pair(T - 1, 0, i, limit);
      const double anchor_limit = limit * sd.anchor_scale;
      if (sd.anchor_prev) {
        const double v = (*sd.anchor_prev)[i];
        trip.emplace_back(row, idx(0, i), 1.0);
        rhs.push_back(v + anchor_limit);
        ++row;
        trip.emplace_back(row, idx(0, i), -1.0);
        rhs.push_back(-(v - anchor_limit));
        ++row;
      }
      if (sd.anchor_next) {
        const double v = (*sd.anchor_next)[i];
        trip.emplace_back(row, idx(T - 1, i), 1.0);
        rhs.push_back(v + anchor_limit);
        ++row;
        trip.emplace_back(row, idx(T - 1, i), -1.0);
        rhs.push_back(-(v - anchor_limit));
        ++row;
      }
    }
    qp.C.resize(row, n);
    qp.C.setFromTriplets(trip.begin(), trip.end());
    qp.d = Eigen::Map<Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  }

  QpSettings settings;
  settings.tolerance = qp_tol;
  const QpSolution sol = solve_qp(qp, settings);
  if (!sol.converged)
    fail_solver("stage QP did not converge (residual " +
                std::to_string(sol.kkt_residual) + ")");

  StageResult res;
  res.output.resize(T, nf);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < nf; ++i) res.output(t, i) = sol.x[idx(t, i)];
  res.info.objective = sol.objective + sd.const_term;
  res.info.kkt_residual = sol.kkt_residual;
  res.info.iterations = sol.iterations;
  return res;
}

Mat week_means(const Mat& m, int weeks) {
  Mat out(weeks, m.cols());
  for (int w = 0; w < weeks; ++w)
    out.row(w) =
        m.middleRows(w * kHoursPerWeek, kHoursPerWeek).colwise().mean();
  return out;
}

}  // namespace

CoarseResult solve_coarse(const DispatchProblem& p, double qp_tol) {
  const int weeks = p.n_weeks();
  StageData sd;
  sd.T = weeks;
  sd.lin = week_means(p.lin_flow, weeks);
  sd.noise = week_means(p.noise, weeks);
  sd.balance.resize(weeks);
  for (int w = 0; w < weeks; ++w)
    sd.balance[w] =
        p.net_load.segment(w * kHoursPerWeek, kHoursPerWeek).mean();
  const Vec rated = p.rated();
  sd.target = p.availability_targets();
  sd.lower.resize(p.n_units());
  sd.upper.resize(p.n_units());
  for (int i = 0; i < p.n_units(); ++i) {
    const double a = p.units[i].availability;
    sd.lower[i] = 0.1 * a * rated[i];
    sd.upper[i] = (0.9 + 0.1 * a) * rated[i];
  }
  sd.ramp_steps = true;
  sd.ramp_wrap = true;
  {
    Vec wk(weeks);
    for (int w = 0; w < weeks; ++w)
      wk[w] = p.flow_const.segment(w * kHoursPerWeek, kHoursPerWeek).mean();
    sd.const_term = wk.sum();
  }

  StageResult r = solve_stage(p, sd, qp_tol);
  CoarseResult out;
  out.weekly_mean = r.output;
  out.info = r.info;
  return out;
}

FineWeekResult solve_fine_week(const DispatchProblem& p, int week,
                               const Vec& weekly_target_mean,
                               const Vec* anchor_prev, const Vec* anchor_next,
                               double qp_tol) {
  if (week < 0 || week >= p.n_weeks()) fail_input("week index out of range");
  const int off = week * kHoursPerWeek;

  StageData sd;
  sd.T = kHoursPerWeek;
  sd.lin = p.lin_flow.middleRows(off, kHoursPerWeek);
  sd.noise = p.noise.middleRows(off, kHoursPerWeek);
  sd.balance = p.net_load.segment(off, kHoursPerWeek);
  // Make the week's balance mean equal the coarse targets exactly (the
  // coarse stage matches it to its own solver tolerance only).
  sd.balance.array() += weekly_target_mean.sum() - sd.balance.mean();
  sd.target = weekly_target_mean;
  sd.lower = Vec::Zero(p.n_units());
  sd.upper = p.rated();
  sd.ramp_steps = true;
  sd.ramp_wrap = false;
  sd.anchor_prev = anchor_prev;
  sd.anchor_next = anchor_next;
  sd.const_term = p.flow_const.segment(off, kHoursPerWeek).sum();

  FineWeekResult out;
  try {
    StageResult r = solve_stage(p, sd, qp_tol);
    out.output = std::move(r.output);
    out.info = r.info;
    return out;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::solver || (!anchor_prev && !anchor_next)) throw;
    log_warn("week " + std::to_string(week + 1) +
             " infeasible under its ramp anchors; retrying with the anchor "
             "window doubled");
    sd.anchor_scale = 2.0;
    StageResult r = solve_stage(p, sd, qp_tol);
    out.output = std::move(r.output);
    out.info = r.info;
    out.info.anchor_relaxed = true;
    return out;
  }
}

MonolithicResult solve_monolithic(const DispatchProblem& p, double qp_tol) {
  StageData sd;
  sd.T = p.horizon;
  sd.lin = p.lin_flow;
  sd.noise = p.noise;
  sd.balance = p.net_load;
  sd.target = p.availability_targets();
  sd.lower = Vec::Zero(p.n_units());
  sd.upper = p.rated();
  sd.ramp_steps = true;
  sd.ramp_wrap = true;
  sd.const_term = p.flow_const.sum();

  StageResult r = solve_stage(p, sd, qp_tol);
  MonolithicResult out;
  out.output = std::move(r.output);
  out.info = r.info;
  return out;
}

DispatchResult dispatch_year(const Network& net, const Table& loads,
                             const std::map<std::string, AnnualSeries>& nuclear_profiles,
                             const DispatchOptions& options) {
  const DispatchProblem p =
      build_dispatch_problem(net, loads, nuclear_profiles, options);
  const int weeks = p.n_weeks();
  const Vec rated = p.rated();

  DispatchResult result;
  result.report.balance_correction = p.applied_correction;

  const CoarseResult coarse = solve_coarse(p, options.qp_tolerance);
  result.report.coarse = coarse.info;

  std::vector<Mat> fine(weeks);
  result.report.weeks.resize(weeks);
  Vec prev_last;
  for (int w = 0; w < weeks; ++w) {
    const Vec target = coarse.weekly_mean.row(w).transpose();
    FineWeekResult r = solve_fine_week(
        p, w, target, w > 0 ? &prev_last : nullptr, nullptr,
        options.qp_tolerance);
    fine[w] = std::move(r.output);
    result.report.weeks[w] = r.info;
    if (r.info.anchor_relaxed) ++result.report.anchors_relaxed;
    prev_last = fine[w].row(kHoursPerWeek - 1).transpose();
  }

  // Periodic ramp wrap: the first step of week 1 must be reachable from the
  // last step of week 52. Re-solve week 1 with both seams anchored if not.
  if (weeks > 1) {
    bool violated = false;
    for (int i = 0; i < p.n_units(); ++i) {
      if (!p.units[i].ramp) continue;
      const double jump =
          std::abs(fine[0](0, i) - fine[weeks - 1](kHoursPerWeek - 1, i));
      if (jump > *p.units[i].ramp + 1e-9) violated = true;
    }
    if (violated) {
      const Vec wrap_prev = fine[weeks - 1].row(kHoursPerWeek - 1).transpose();
      const Vec next_first = fine[1].row(0).transpose();
      const Vec target = coarse.weekly_mean.row(0).transpose();
      FineWeekResult r = solve_fine_week(p, 0, target, &wrap_prev, &next_first,
                                         options.qp_tolerance);
      fine[0] = std::move(r.output);
      result.report.weeks[0] = r.info;
      if (r.info.anchor_relaxed) ++result.report.anchors_relaxed;
      result.report.wrap_resolved = true;
    }
  }

  double objective = 0.0;
  for (const auto& wk : result.report.weeks) objective += wk.objective;
  result.report.objective = objective;
  result.report.feasible_point_valid = constant_schedule_feasible(p);
  result.report.feasible_point_objective =
      schedule_objective(p, constant_schedule(p));

  // Assemble the table: every generator in network order.
  result.gens.labels = p.gen_labels;
  result.gens.values.resize(p.horizon,
                            static_cast<Eigen::Index>(p.gen_labels.size()));
  int nuclear_col = 0;
  for (std::size_t c = 0; c < p.gen_labels.size(); ++c) {
    const int u = p.unit_of_gen[c];
    if (u < 0) {
      result.gens.values.col(static_cast<Eigen::Index>(c)) =
          p.nuclear.col(nuclear_col++);
      continue;
    }
    for (int w = 0; w < weeks; ++w)
      result.gens.values                         //
          .col(static_cast<Eigen::Index>(c))
          .segment(w * kHoursPerWeek, kHoursPerWeek) = fine[w].col(u);
  }
  return result;
}

double VerifyReport::max_violation() const {
  return std::max({bounds, balance, availability, ramp, nuclear_mismatch});
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "bounds violation:        " << bounds << "\n"
     << "balance violation:       " << balance << "\n"
     << "availability violation:  " << availability << "\n"
     << "ramp violation:          " << ramp << "\n"
     << "nuclear profile mismatch: " << nuclear_mismatch << "\n"
     << "objective value:         " << objective << "\n";
  return os.str();
}

VerifyReport verify_solution(const DispatchProblem& p, const Table& gens) {
  if (gens.rows() != p.horizon)
    fail_input("generator table horizon mismatch");
  VerifyReport r;

  Mat output(p.horizon, p.n_units());
  int found = 0;
  int nuclear_found = 0;
  for (std::size_t c = 0; c < gens.labels.size(); ++c) {
    // Match columns by label against the problem's generator list.
    const auto it =
        std::find(p.gen_labels.begin(), p.gen_labels.end(), gens.labels[c]);
    if (it == p.gen_labels.end())
      fail_input("generator column '" + gens.labels[c] +
                 "' is not part of the problem");
    const int gi = static_cast<int>(it - p.gen_labels.begin());
    const int u = p.unit_of_gen[gi];
    const auto col = gens.values.col(static_cast<Eigen::Index>(c));
    if (u < 0) {
      int nc = 0;
      for (int k = 0; k < gi; ++k)
        if (p.unit_of_gen[k] < 0) ++nc;
      r.nuclear_mismatch = std::max(
          r.nuclear_mismatch, (col - p.nuclear.col(nc)).cwiseAbs().maxCoeff());
      ++nuclear_found;
    } else {
      output.col(u) = col;
      ++found;
    }
  }
  if (found != p.n_units())
    fail_input("generator table lacks " +
               std::to_string(p.n_units() - found) + " dispatchable columns");

  const Vec rated = p.rated();
  for (int i = 0; i < p.n_units(); ++i) {
    const auto col = output.col(i);
    r.bounds = std::max(r.bounds, std::max(-col.minCoeff(), 0.0));
    r.bounds = std::max(r.bounds, std::max(col.maxCoeff() - rated[i], 0.0));
    r.availability =
        std::max(r.availability,
                 std::abs(col.mean() - p.units[i].availability * rated[i]));
    if (p.units[i].ramp) {
      const double limit = *p.units[i].ramp;
      for (int t = 0; t < p.horizon; ++t) {
        const int next = (t + 1) % p.horizon;  // periodic
        const double jump = std::abs(col[next] - col[t]);
        r.ramp = std::max(r.ramp, jump - limit);
      }
    }
  }
  r.ramp = std::max(r.ramp, 0.0);

  const Vec production =
      output.rowwise().sum() +
      (p.nuclear.cols() > 0 ? Vec(p.nuclear.rowwise().sum())
                            : Vec(Vec::Zero(p.horizon)));
  r.balance = (production - p.loads_total).cwiseAbs().maxCoeff();
  r.objective = schedule_objective(p, output);
  return r;
}

std::string DispatchReport::to_text() const {
  std::ostringstream os;
  os << "coarse objective: " << coarse.objective
     << " (kkt " << coarse.kkt_residual << ")\n";
  double worst_kkt = 0.0;
  for (const auto& w : weeks) worst_kkt = std::max(worst_kkt, w.kkt_residual);
  os << "fine weeks: " << weeks.size() << ", worst kkt " << worst_kkt << "\n";
  os << "objective: " << objective << "\n";
  os << "constant-schedule objective: " << feasible_point_objective
     << (feasible_point_valid ? " (feasible)" : " (not feasible per step)")
     << "\n";
  os << "balance correction: " << balance_correction << "\n";
  os << "wrap re-solve: " << (wrap_resolved ? "yes" : "no")
     << ", anchors relaxed: " << anchors_relaxed << "\n";
  return os.str();
}

}  // namespace gridgen
