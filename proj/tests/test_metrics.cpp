#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ppt/errors.hpp"
#include "ppt/metrics.hpp"

using namespace ppt;
using namespace ppt::metrics;

TEST_CASE("jerk vanishes on a constant-velocity trajectory") {
  std::vector<Eigen::Vector3d> pos;
  for (int i = 0; i < 50; ++i)
    pos.push_back(Eigen::Vector3d(0.1 * i, -0.2 * i, 0.05 * i));
  CHECK(jerk_rms(pos, 0.01) < 1e-9);
}

TEST_CASE("cubic trajectory has constant jerk 6") {
  std::vector<Eigen::Vector3d> pos;
  const double dt = 1e-3;
  for (int i = 0; i < 2000; ++i) {
    const double t = i * dt;
    pos.push_back(Eigen::Vector3d(t * t * t, 0.0, 0.0));
  }
  CHECK(jerk_rms(pos, dt) == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("jerk scales linearly with position scaling") {
  std::vector<Eigen::Vector3d> pos, pos2;
  for (int i = 0; i < 100; ++i) {
    const double t = 0.01 * i;
    const Eigen::Vector3d p(std::sin(3.0 * t), std::cos(2.0 * t), t * t);
    pos.push_back(p);
    pos2.push_back(2.0 * p);
  }
  CHECK(jerk_rms(pos2, 0.01) == doctest::Approx(2.0 * jerk_rms(pos, 0.01)).epsilon(1e-12));
}

TEST_CASE("jerk needs at least four samples") {
  std::vector<Eigen::Vector3d> pos(3, Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(jerk_rms(pos, 0.01), InvalidInput);
}

TEST_CASE("percentile uses linear interpolation between closest ranks") {
  std::vector<double> series(100);
  std::iota(series.begin(), series.end(), 1.0);  // 1..100
  CHECK(peak_wrench_p95(series) == doctest::Approx(95.05).epsilon(1e-12));

  std::vector<double> constant(17, 3.5);
  CHECK(peak_wrench_p95(constant) == 3.5);

  // permutation invariance
  std::vector<double> shuffled = series;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(3));
  CHECK(peak_wrench_p95(shuffled) == peak_wrench_p95(series));

  CHECK_THROWS_AS(peak_wrench_p95({}), InvalidInput);
}

TEST_CASE("overload ratio counts strict exceedances") {
  CHECK(overload_ratio({5.0, 15.0, 5.0}, 10.0) == doctest::Approx(1.0 / 3.0));
  CHECK(overload_ratio({1.0, 2.0, 3.0}, 10.0) == 0.0);
  // boundary sample is not an overload
  CHECK(overload_ratio({10.0}, 10.0) == 0.0);
  CHECK_THROWS_AS(overload_ratio({}, 1.0), InvalidInput);
}

TEST_CASE("contact continuity") {
  SUBCASE("always in contact") {
    std::vector<std::uint8_t> flags(20, 1);
    CHECK(contact_continuity(flags) == 1.0);
  }
  SUBCASE("alternating contact over 2n steps gives 1/n") {
    const int n = 8;
    std::vector<std::uint8_t> flags;
    for (int i = 0; i < 2 * n; ++i) flags.push_back(i % 2 == 0 ? 1 : 0);
    CHECK(contact_continuity(flags) == doctest::Approx(1.0 / n));
  }
  SUBCASE("never in contact") {
    std::vector<std::uint8_t> flags(10, 0);
    CHECK(contact_continuity(flags) == 0.0);
  }
  SUBCASE("mean-segment mode") {
    // two segments of lengths 3 and 1: mean 2, total 4 -> 0.5
    std::vector<std::uint8_t> flags = {1, 1, 1, 0, 1, 0};
    CHECK(contact_continuity(flags, ContinuityMode::MeanSegment) ==
          doctest::Approx(0.5));
    CHECK(contact_continuity(flags) == doctest::Approx(0.75));
  }
}

TEST_CASE("progress at horizon is the final running max") {
  CHECK(progress_at_horizon({0.0, 0.5, 1.0, 1.0}) == 1.0);
  CHECK(progress_at_horizon({0.0, 0.0, 0.0}) == 0.0);
  // running max ignores later regressions
  CHECK(progress_at_horizon({0.1, 0.8, 0.4}) == doctest::Approx(0.8));
  // clipped to [0, 1]
  CHECK(progress_at_horizon({-0.5, 1.7}) == 1.0);
}

TEST_CASE("aggregate reports mean and standard error") {
  const auto agg = aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(agg.mean == doctest::Approx(2.5));
  // sample sd = sqrt(5/3), se = sd / 2
  CHECK(agg.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(agg.count == 4);
  CHECK(aggregate({}).count == 0);
}

TEST_CASE("moving average smooths with a trailing window") {
  const auto out = moving_average({1.0, 2.0, 3.0, 4.0}, 2);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == doctest::Approx(1.5));
  CHECK(out[2] == doctest::Approx(2.5));
  CHECK(out[3] == doctest::Approx(3.5));
}

TEST_CASE("episode metrics roll up from the log") {
  EpisodeLog log;
  log.dt = 0.01;
  log.horizon = 0.05;
  for (int i = 0; i < 5; ++i) {
    log.t.push_back(i * log.dt);
    log.tool_position.push_back(Eigen::Vector3d(0.01 * i, 0.0, 0.0));
    log.wrench_norm.push_back(1.0 + i);
    log.power.push_back(0.5 * i);
    log.power_nominal.push_back(0.5 * i);
    log.gamma.push_back(1.0);
    log.contact.push_back(i >= 2 ? 1 : 0);
    log.progress.push_back(0.2 * i);
  }
  log.success = true;
  const EpisodeMetrics m = compute(log, 1.0);
  CHECK(m.success);
  CHECK(m.max_power == doctest::Approx(2.0));
  CHECK(m.overload_ratio == doctest::Approx(2.0 / 5.0));
  CHECK(m.contact_continuity == 1.0);
  CHECK(m.progress_at_horizon == doctest::Approx(0.8));
}
