#include "gridgen/series.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gridgen/rng.hpp"

using namespace gridgen;

namespace {

// Independent weekday oracle (Sakamoto's congruence), Monday = 1.
int weekday_oracle(int y, int m, int d) {
  static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  if (m < 3) y -= 1;
  const int sunday0 = (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
  return sunday0 == 0 ? 7 : sunday0;
}

RawSeries ramp_series(int year, int extra_hours = 0) {
  RawSeries s;
  s.region = "T";
  const std::int64_t start = hours_from_epoch(year, 1, 1, 0);
  const std::int64_t end = hours_from_epoch(year + 1, 1, 1, 0) + extra_hours;
  for (std::int64_t h = start; h < end; ++h) {
    s.hours.push_back(h);
  }
  s.values.resize(static_cast<Eigen::Index>(s.hours.size()));
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    s.values[i] = static_cast<double>(i);
  return s;
}

}  // namespace

TEST_SUITE("series") {
  TEST_CASE("weekday matches the independent calendar oracle") {
    for (int y : {1999, 2000, 2015, 2016, 2020, 2023, 2100}) {
      for (int m : {1, 2, 3, 6, 12}) {
        CHECK(weekday_iso(y, m, 17) == weekday_oracle(y, m, 17));
      }
    }
    // 2016-01-01 was a Friday; the first Monday is three days later.
    CHECK(weekday_oracle(2016, 1, 1) == 5);
    CHECK(days_to_first_monday(2016) == 3);
    // 2018-01-01 was a Monday.
    CHECK(days_to_first_monday(2018) == 0);
  }

  TEST_CASE("timestamp parsing") {
    CHECK(parse_timestamp_hours("1970-01-01T00:00:00") == 0);
    CHECK(parse_timestamp_hours("1970-01-02 01:00") == 25);
    CHECK_THROWS_AS(parse_timestamp_hours("1970-01-01T00:30:00"), Error);
    CHECK_THROWS_AS(parse_timestamp_hours("garbage"), Error);
  }

  TEST_CASE("fill_gaps interpolates linearly") {
    RawSeries s;
    s.region = "T";
    s.hours = {0, 1, 2};
    s.values.resize(3);
    s.values << 1.0, std::nan(""), 3.0;
    const RawSeries f = fill_gaps(s);
    CHECK(f.values[1] == doctest::Approx(2.0));
    CHECK(f.values[0] == 1.0);
    CHECK(f.values[2] == 3.0);

    SUBCASE("no gaps is the identity") {
      const RawSeries g = fill_gaps(f);
      CHECK((g.values - f.values).norm() == 0.0);
    }
    SUBCASE("equally spaced points on a line") {
      RawSeries t;
      t.hours = {0, 1, 2, 3};
      t.values.resize(4);
      t.values << 0.0, std::nan(""), std::nan(""), 3.0;
      const RawSeries g = fill_gaps(t);
      CHECK(g.values[1] == doctest::Approx(1.0));
      CHECK(g.values[2] == doctest::Approx(2.0));
    }
    SUBCASE("overlong runs are rejected") {
      RawSeries t;
      t.hours.resize(30);
      t.values.resize(30);
      for (int i = 0; i < 30; ++i) {
        t.hours[i] = i;
        t.values[i] = (i == 0 || i == 29) ? 1.0 : std::nan("");
      }
      CHECK_THROWS_AS(fill_gaps(t, 24), Error);
      CHECK_NOTHROW(fill_gaps(t, 28));
    }
    SUBCASE("missing endpoints are rejected") {
      RawSeries t;
      t.hours = {0, 1};
      t.values.resize(2);
      t.values << std::nan(""), 1.0;
      CHECK_THROWS_AS(fill_gaps(t), Error);
    }
    SUBCASE("present entries are bit-identical") {
      RawSeries t;
      t.hours = {0, 1, 2, 3, 4};
      t.values.resize(5);
      t.values << 0.1234567890123456, std::nan(""), 2.5, std::nan(""),
          0.9876543210987654;
      const RawSeries g = fill_gaps(t);
      CHECK(g.values[0] == 0.1234567890123456);
      CHECK(g.values[2] == 2.5);
      CHECK(g.values[4] == 0.9876543210987654);
    }
  }

  TEST_CASE("canonicalize_year truncates then rotates to the first Monday") {
    // 2018 starts on a Monday: pure truncation.
    {
      const AnnualSeries a = canonicalize_year(ramp_series(2018), 2018);
      CHECK(a.values.size() == kStepsPerYear);
      CHECK(a.values[0] == 0.0);
      CHECK(a.values[kStepsPerYear - 1] == kStepsPerYear - 1);
    }
    // 2016 starts on a Friday: rotate left by 72 hours; 2016 is a leap year,
    // so 48 tail hours are dropped before rotation.
    {
      const AnnualSeries a = canonicalize_year(ramp_series(2016), 2016);
      CHECK(a.values.size() == kStepsPerYear);
      CHECK(a.values[0] == 72.0);
      // The wrap re-enters at the truncated start.
      CHECK(a.values[kStepsPerYear - 72] == 0.0);
      CHECK(a.values[kStepsPerYear - 73] == kStepsPerYear - 1);
    }
    SUBCASE("constant series is rotation invariant") {
      RawSeries s = ramp_series(2016);
      s.values.setConstant(5.5);
      const AnnualSeries a = canonicalize_year(s, 2016);
      CHECK(a.values.minCoeff() == 5.5);
      CHECK(a.values.maxCoeff() == 5.5);
    }
    SUBCASE("short series is rejected") {
      RawSeries s = ramp_series(2018);
      s.hours.resize(5000);
      s.values.conservativeResize(5000);
      CHECK_THROWS_AS(canonicalize_year(s, 2018), Error);
    }
  }

  TEST_CASE("rotating by whole weeks preserves weekday-hour slot means") {
    RngStream rng(99);
    Vec v(kStepsPerYear);
    for (int t = 0; t < kStepsPerYear; ++t) v[t] = rng.normal();
    // Slot means of the original.
    Vec slot = Vec::Zero(kHoursPerWeek);
    for (int t = 0; t < kStepsPerYear; ++t) slot[t % kHoursPerWeek] += v[t];
    for (int k : {1, 3, 52}) {
      Vec rotated(kStepsPerYear);
      for (int t = 0; t < kStepsPerYear; ++t)
        rotated[t] = v[(t + k * kHoursPerWeek) % kStepsPerYear];
      Vec slot2 = Vec::Zero(kHoursPerWeek);
      for (int t = 0; t < kStepsPerYear; ++t)
        slot2[t % kHoursPerWeek] += rotated[t];
      CHECK((slot - slot2).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("pearson") {
    Vec a(4);
    a << 1, 2, 3, 4;
    CHECK(pearson(a, a) == doctest::Approx(1.0));
    CHECK(pearson(a, Vec(-a)) == doctest::Approx(-1.0));
    CHECK(pearson(a, Vec(a.array() + 7.0)) == doctest::Approx(1.0));
    Vec c = Vec::Constant(4, 2.0);
    CHECK_THROWS_AS(pearson(a, c), Error);
  }

  TEST_CASE("raw series csv round trip with gaps") {
    namespace fs = std::filesystem;
    const fs::path dir = gridgen::testing::make_temp_dir("series");
    {
      std::ofstream out(dir / "x.csv");
      out << "timestamp,XX\n";
      out << "2016-01-01T00:00:00,100\n";
      out << "2016-01-01T01:00:00,\n";
      out << "2016-01-01T02:00:00,120\n";
    }
    const RawSeries s = read_raw_series_csv(dir / "x.csv");
    CHECK(s.region == "XX");
    CHECK(s.hours.size() == 3);
    CHECK(std::isnan(s.values[1]));
    CHECK(s.values[2] == 120.0);
    fs::remove_all(dir);
  }
}
