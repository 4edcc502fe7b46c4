#include "gridgen/dispatch.hpp"

#include "fixtures.hpp"
#include "gridgen/dc_flow.hpp"

#include <doctest.h>

#include <cmath>

using namespace gridgen;
using namespace gridgen::testing;

namespace {

Network one_gen_net(double rated, double availability) {
  Network net;
  net.buses.push_back({"n1", "AA", 0.0});
  net.buses.push_back({"n2", "AA", 1.0});
  net.rebuild_index();
  net.lines = {{"l1", 0, 1, 10.0, 5.0}};
  net.generators.push_back(
      {"g1", 0, GenType::gas_oil, rated, availability, {}});
  return net;
}

DispatchProblem fixture_problem(int horizon, double noise_scale,
                                double amplitude, std::uint64_t seed = 5) {
  const Network net = two_country_grid();
  const auto nuclear = fixture_nuclear_profiles(horizon);
  Table loads = wavy_load_table(net, horizon, 18.0, amplitude);
  rebalance_loads(loads, net, nuclear);
  DispatchOptions opt;
  opt.seed = seed;
  opt.noise_scale = noise_scale;
  return build_dispatch_problem(net, loads, nuclear, opt);
}

}  // namespace

TEST_SUITE("dispatch") {
  TEST_CASE("constant schedule: availability times rated power") {
    const Network net = one_gen_net(1.0, 0.5);
    Table loads = flat_load_table(net, kHoursPerWeek, 0.5);
    DispatchOptions opt;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);
    const Mat fp = feasible_point(p);
    CHECK(fp.rows() == kHoursPerWeek);
    CHECK(fp.cols() == 1);
    CHECK(fp.minCoeff() == doctest::Approx(0.5));
    CHECK(fp.maxCoeff() == doctest::Approx(0.5));
    SUBCASE("zero availability gives the zero schedule") {
      const Network z = one_gen_net(1.0, 0.0);
      Table zl = flat_load_table(z, kHoursPerWeek, 1e-9);
      zl.values.setZero();
      const DispatchProblem pz = build_dispatch_problem(z, zl, {}, opt);
      CHECK(feasible_point(pz).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("time-varying load invalidates the constant schedule") {
      Table wavy = wavy_load_table(net, kHoursPerWeek, 0.5, 0.2);
      rebalance_loads(wavy, net, {});
      const DispatchProblem pw = build_dispatch_problem(net, wavy, {}, opt);
      CHECK_THROWS_AS(static_cast<void>(feasible_point(pw)), Error);
      CHECK_FALSE(constant_schedule_feasible(pw));
    }
  }

  TEST_CASE("inconsistent annual balance is rejected up front") {
    const Network net = one_gen_net(1.0, 0.5);
    Table loads = flat_load_table(net, kHoursPerWeek, 0.9);  // needs 0.5
    DispatchOptions opt;
    CHECK_THROWS_WITH_AS(
        static_cast<void>(build_dispatch_problem(net, loads, {}, opt)),
        doctest::Contains("re-normalize"), Error);
  }

  TEST_CASE("single generator tracking its availability") {
    const Network net = one_gen_net(2.0, 0.4);
    Table loads = flat_load_table(net, 2 * kHoursPerWeek, 0.8);
    DispatchOptions opt;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);
    SUBCASE("coarse outputs sit at the target") {
      const CoarseResult c = solve_coarse(p);
      REQUIRE(c.weekly_mean.rows() == 2);
      CHECK(c.weekly_mean(0, 0) == doctest::Approx(0.8).epsilon(1e-7));
      CHECK(c.weekly_mean(1, 0) == doctest::Approx(0.8).epsilon(1e-7));
      // Weekly availabilities average to the annual one.
      CHECK(c.weekly_mean.col(0).mean() == doctest::Approx(0.8).epsilon(1e-8));
    }
    SUBCASE("fine week with flat load is flat") {
      Vec target(1);
      target << 0.8;
      const FineWeekResult f = solve_fine_week(p, 0, target, nullptr, nullptr);
      CHECK(f.output.col(0).minCoeff() == doctest::Approx(0.8).epsilon(1e-6));
      CHECK(f.output.col(0).maxCoeff() == doctest::Approx(0.8).epsilon(1e-6));
      CHECK(f.info.kkt_residual < 1e-6);
    }
  }

  TEST_CASE("two identical generators split the load evenly") {
    Network net;
    net.buses.push_back({"n1", "AA", 0.0});
    net.buses.push_back({"n2", "AA", 1.0});
    net.rebuild_index();
    net.lines = {{"l1", 0, 1, 10.0, 3.0}};
    net.generators.push_back({"g1", 0, GenType::gas_oil, 2.0, 0.5, {}});
    net.generators.push_back({"g2", 0, GenType::gas_oil, 2.0, 0.5, {}});
    Table loads = wavy_load_table(net, 2 * kHoursPerWeek, 2.0, 0.2);
    rebalance_loads(loads, net, {});
    DispatchOptions opt;
    opt.noise_scale = 0.0;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);
    const CoarseResult c = solve_coarse(p);
    CHECK((c.weekly_mean.col(0) - c.weekly_mean.col(1)).cwiseAbs().maxCoeff() <
          1e-6);
  }

  TEST_CASE("ramp limits hold within a week and across anchors") {
    const int horizon = 2 * kHoursPerWeek;
    const DispatchProblem p = fixture_problem(horizon, 1.0, 0.25);
    const CoarseResult c = solve_coarse(p);
    Vec t0 = c.weekly_mean.row(0).transpose();
    Vec t1 = c.weekly_mean.row(1).transpose();
    const FineWeekResult w0 = solve_fine_week(p, 0, t0, nullptr, nullptr);
    Vec last = w0.output.row(kHoursPerWeek - 1).transpose();
    const FineWeekResult w1 = solve_fine_week(p, 1, t1, &last, nullptr);
    for (int i = 0; i < p.n_units(); ++i) {
      if (!p.units[i].ramp) continue;
      const double limit = *p.units[i].ramp + 1e-8;
      for (int t = 0; t + 1 < kHoursPerWeek; ++t) {
        CHECK(std::abs(w0.output(t + 1, i) - w0.output(t, i)) <= limit);
        CHECK(std::abs(w1.output(t + 1, i) - w1.output(t, i)) <= limit);
      }
      // The anchored seam obeys the ramp too.
      CHECK(std::abs(w1.output(0, i) - w0.output(kHoursPerWeek - 1, i)) <=
            limit);
    }
    CHECK(w0.info.kkt_residual < 1e-6);
    CHECK(w1.info.kkt_residual < 1e-6);
  }

  TEST_CASE("dispatch_year satisfies every constraint family") {
    const int horizon = 4 * kHoursPerWeek;
    const Network net = two_country_grid();
    const auto nuclear = fixture_nuclear_profiles(horizon);
    Table loads = wavy_load_table(net, horizon, 18.0, 0.25);
    rebalance_loads(loads, net, nuclear);
    DispatchOptions opt;
    opt.seed = 12;
    const DispatchResult r = dispatch_year(net, loads, nuclear, opt);
    CHECK(r.gens.rows() == horizon);
    CHECK(r.gens.cols() == 10);

    const DispatchProblem p = build_dispatch_problem(net, loads, nuclear, opt);
    const VerifyReport v = verify_solution(p, r.gens);
    CHECK(v.balance < 1e-6);
    CHECK(v.bounds < 1e-8);
    CHECK(v.availability < 1e-6);
    CHECK(v.ramp < 1e-8);
    CHECK(v.nuclear_mismatch == 0.0);
    // Objective bookkeeping is consistent between the report and verifier.
    CHECK(v.objective == doctest::Approx(r.report.objective).epsilon(1e-6));
    SUBCASE("same options reproduce the table bit for bit") {
      const DispatchResult r2 = dispatch_year(net, loads, nuclear, opt);
      CHECK((r2.gens.values - r.gens.values).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("different replica labels change the dispatch") {
      DispatchOptions o2 = opt;
      o2.replica = "other";
      const DispatchResult r2 = dispatch_year(net, loads, nuclear, o2);
      CHECK((r2.gens.values - r.gens.values).cwiseAbs().maxCoeff() > 1e-9);
    }
  }

  TEST_CASE("solver objective never exceeds a feasible constant schedule") {
    // Flat load: the constant schedule is feasible, so optimality gives
    // objective(solution) <= objective(constant).
    const Network net = one_gen_net(2.0, 0.4);
    Table loads = flat_load_table(net, 2 * kHoursPerWeek, 0.8);
    DispatchOptions opt;
    opt.seed = 3;
    opt.noise_scale = 1.0;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);
    const MonolithicResult m = solve_monolithic(p);
    const Mat fp = feasible_point(p);
    CHECK(m.info.objective <= schedule_objective(p, fp) + 1e-9);
  }

  TEST_CASE("verify_solution flags constructed violations") {
    const Network net = one_gen_net(2.0, 0.4);
    Table loads = flat_load_table(net, kHoursPerWeek, 0.8);
    DispatchOptions opt;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);
    Table gens;
    gens.labels = {"g1"};
    gens.values = Mat::Constant(kHoursPerWeek, 1, 0.8);
    SUBCASE("feasible point has zero primal residuals") {
      const VerifyReport v = verify_solution(p, gens);
      CHECK(v.bounds == 0.0);
      CHECK(v.balance < 1e-12);
      CHECK(v.availability < 1e-12);
      CHECK(v.ramp == 0.0);
    }
    SUBCASE("a bound violation is reported with its magnitude") {
      gens.values(10, 0) = 2.1;  // rated is 2.0
      const VerifyReport v = verify_solution(p, gens);
      CHECK(v.bounds == doctest::Approx(0.1));
    }
  }

  TEST_CASE("decomposition stays near the monolithic optimum") {
    // Small instance: 336 steps, three dispatchable units.
    Network net;
    net.buses.push_back({"n1", "AA", 0.0});
    net.buses.push_back({"n2", "AA", 0.6});
    net.buses.push_back({"n3", "AA", 0.4});
    net.rebuild_index();
    net.lines = {{"l1", 0, 1, 10.0, 2.0},
                 {"l2", 1, 2, 8.0, 2.0},
                 {"l3", 0, 2, 12.0, 2.0}};
    net.generators.push_back({"g1", 0, GenType::coal, 2.0, 0.5, 2.0});
    net.generators.push_back({"g2", 1, GenType::gas_oil, 2.0, 0.4, {}});
    net.generators.push_back({"g3", 2, GenType::hydro_storage, 1.5, 0.4, {}});
    const int horizon = 2 * kHoursPerWeek;
    Table loads = wavy_load_table(net, horizon, 2.4, 0.25);
    rebalance_loads(loads, net, {});
    DispatchOptions opt;
    opt.seed = 21;
    const DispatchProblem p = build_dispatch_problem(net, loads, {}, opt);

    const MonolithicResult mono = solve_monolithic(p);
    CHECK(mono.info.kkt_residual < 1e-6);

    const DispatchResult dec = dispatch_year(net, loads, {}, opt);
    Mat output(horizon, p.n_units());
    for (int i = 0; i < p.n_units(); ++i)
      output.col(i) = dec.gens.values.col(dec.gens.column(p.units[i].label));
    const double dec_obj = schedule_objective(p, output);
    CHECK(dec_obj >= mono.info.objective - 1e-9);
    CHECK(std::abs(dec_obj - mono.info.objective) <=
          0.05 * std::abs(mono.info.objective));
  }
}
