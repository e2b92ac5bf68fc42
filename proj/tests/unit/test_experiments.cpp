#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "gmmsi/experiments.hpp"
#include "gmmsi/presets.hpp"
#include "models.hpp"

using namespace gmmsi;

TEST_CASE("sigma2 grid") {
  const std::vector<double> g = sigma2_grid();
  CHECK(g.size() == 36);
  CHECK(g.front() == 1e-1);
  CHECK(g.back() == 1e-8);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
  CHECK(g[5] == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(sigma2_grid(1e-3, 1e-3, 5) == std::vector<double>{1e-3});
  CHECK_THROWS_AS(sigma2_grid(1e-3, 1e-2), Error);
}

TEST_CASE("sweep validation") {
  const JointGmm model = two_signal_model(1);
  SweepConfig cfg;
  cfg.m1 = 3;
  cfg.m2 = 2;
  CHECK_NOTHROW(validate(cfg, model));
  SweepConfig bad = cfg;
  bad.trials = 99;
  CHECK_THROWS_AS(validate(bad, model), Error);
  bad = cfg;
  bad.trials = kMaxTrials + 1;
  CHECK_THROWS_AS(validate(bad, model), Error);
  bad = cfg;
  bad.sigma2 = {1e-2, 1e-2};
  CHECK_THROWS_AS(validate(bad, model), Error);
  bad = cfg;
  bad.sigma2 = {1e-3, 1e-2};
  CHECK_THROWS_AS(validate(bad, model), Error);
  bad = cfg;
  bad.m1 = 0;
  bad.m2 = 0;
  CHECK_THROWS_AS(validate(bad, model), Error);
  CHECK(parse_task("reconstruct_dc") == Task::kReconstructDc);
  CHECK_THROWS_AS(parse_task("classify"), Error);
}

TEST_CASE("Wilson interval") {
  const auto [lo, hi] = wilson_interval(0.5, 100);
  CHECK(lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.59617).epsilon(1e-4));
  const auto [zlo, zhi] = wilson_interval(0.0, 1000);
  CHECK(zlo == 0.0);
  CHECK(zhi == doctest::Approx(1.644854 * 1.644854 / (1000 + 1.644854 * 1.644854)));
}

TEST_CASE("slope fitting") {
  std::vector<double> s = sigma2_grid(1e-2, 1e-6, 4);
  std::vector<double> v, c;
  for (double x : s) {
    v.push_back(3.0 * std::pow(x, 0.5));
    c.push_back(0.25);
  }
  CHECK(std::abs(fit_slope(s, v, 4).slope - 0.5) < 1e-9);
  CHECK(std::abs(fit_slope(s, c, 2).slope) < 1e-9);
  const SlopeFit tail = fit_slope(s, v, 1);
  CHECK(tail.used == 5);
  v[s.size() - 1] = 0.0;
  const SlopeFit skip = fit_slope(s, v, 1);
  CHECK(skip.excluded == 1);
  CHECK(skip.used == 4);
  CHECK_THROWS_AS(fit_slope(s, v, 0.3), Error);
  try {
    fit_slope({1e-3}, {0.1}, 1);
    FAIL("expected undefined slope");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefined);
  }
}

TEST_CASE("ranges") {
  CHECK(parse_range("0..5").lo == 0);
  CHECK(parse_range("0..5").hi == 5);
  CHECK(parse_range("7").hi == 7);
  CHECK_THROWS_AS(parse_range("5..2"), Error);
  CHECK_THROWS_AS(parse_range("a..b"), Error);
  CHECK_THROWS_AS(parse_range("-1..2"), Error);
}

TEST_CASE("single-point sweep") {
  const JointGmm model = two_signal_model(2);
  SweepConfig cfg;
  cfg.task = Task::kClassifySi;
  cfg.m1 = 4;
  cfg.m2 = 2;
  cfg.sigma2 = {1e-2};
  cfg.trials = 400;
  const SweepCurve curve = run_sweep(model, cfg);
  REQUIRE(curve.points.size() == 1);
  const SweepPoint& p = curve.points[0];
  CHECK(p.trials == 400);
  CHECK(p.lo <= p.value);
  CHECK(p.value <= p.hi);
  CHECK(p.value == doctest::Approx(static_cast<double>(p.errors) / 400.0));
  CHECK(curve.csv().rows() == 1);
  CHECK(curve.csv().header()[0] == "sigma2");
}

TEST_CASE("classification sweep stays below the union bound") {
  const JointGmm model = two_signal_model(3);
  for (Task task : {Task::kClassifySi, Task::kClassifyDc})
    for (bool freeze : {false, true}) {
      SweepConfig cfg;
      cfg.task = task;
      cfg.m1 = 6;
      cfg.m2 = 4;
      cfg.sigma2 = sigma2_grid(1e-1, 1e-4, 2);
      cfg.trials = 1000;
      cfg.freeze_kernel = freeze;
      const SweepCurve curve = run_sweep(model, cfg);
      for (const SweepPoint& p : curve.points) {
        CHECK(p.value <= p.bound + 3 * (p.hi - p.lo) / 2 + 1e-12);
        CHECK(p.bound > 0.0);
      }
      // Common random numbers: error counts are monotone in practice at this budget.
      CHECK(curve.points.front().errors >= curve.points.back().errors);
    }
}

TEST_CASE("reconstruction sweep: Gaussian formula and ordering") {
  const JointGmm gauss = gaussian_334_model(2);
  SweepConfig cfg;
  cfg.task = Task::kReconstructSi;
  cfg.m1 = 2;
  cfg.m2 = 1;
  cfg.sigma2 = {1e-2, 1e-4};
  cfg.trials = 20000;
  cfg.freeze_kernel = true;
  const SweepCurve g = run_sweep(gauss, cfg);
  for (const SweepPoint& p : g.points) {
    REQUIRE(p.mmse_gauss.has_value());
    CHECK(std::abs(p.value - *p.mmse_gauss) < 4 * p.se);
    CHECK(p.mse_cr == doctest::Approx(p.value).epsilon(1e-9));
  }

  const JointGmm model = two_signal_model(4);
  for (Task task : {Task::kReconstructSi, Task::kReconstructDc}) {
    cfg.task = task;
    cfg.m1 = 6;
    cfg.m2 = 4;
    cfg.sigma2 = {1e-2, 1e-5, 1e-8};
    cfg.trials = 600;
    cfg.freeze_kernel = false;
    const SweepCurve curve = run_sweep(model, cfg);
    for (const SweepPoint& p : curve.points) {
      CHECK_FALSE(p.mmse_gauss.has_value());
      CHECK(p.mse_lb <= p.value + 3 * p.se);
      CHECK(p.value <= p.mse_cr + 3 * p.mse_cr_se);
      CHECK(p.mse_cr <= p.mse_y1 + 3 * p.mse_y1_se);
    }
    CHECK(curve.csv().data()[0][3].empty());
  }
}

TEST_CASE("sweeps are reproducible across thread counts") {
  const JointGmm model = two_signal_model(5);
  SweepConfig cfg;
  cfg.task = Task::kReconstructSi;
  cfg.m1 = 5;
  cfg.m2 = 3;
  cfg.sigma2 = sigma2_grid(1e-1, 1e-3, 2);
  cfg.trials = 300;
  setenv("GMMSI_THREADS", "1", 1);
  const std::string one = run_sweep(model, cfg).csv().str();
  setenv("GMMSI_THREADS", "4", 1);
  CHECK(worker_count() == 4);
  const std::string four = run_sweep(model, cfg).csv().str();
  const std::string again = run_sweep(model, cfg).csv().str();
  CHECK(one == four);
  CHECK(four == again);
  cfg.task = Task::kClassifyDc;
  const std::string c1 = run_sweep(model, cfg).csv().str();
  setenv("GMMSI_THREADS", "3", 1);
  CHECK(c1 == run_sweep(model, cfg).csv().str());
  cfg.seed = 2;
  CHECK(c1 != run_sweep(model, cfg).csv().str());
  unsetenv("GMMSI_THREADS");
}

TEST_CASE("trial escalation") {
  const JointGmm model = two_signal_model(6);
  SweepConfig cfg;
  cfg.task = Task::kClassifySi;
  cfg.m1 = 3;
  cfg.m2 = 0;
  cfg.sigma2 = {1e-1};
  cfg.trials = 100;
  cfg.min_errors = 200;
  cfg.freeze_kernel = true;
  const SweepCurve c = run_sweep(model, cfg);
  CHECK(c.points[0].errors >= 200);
  CHECK(c.points[0].trials > 100);
  CHECK(c.points[0].trials <= kMaxTrials);
  CHECK(c.config.trials == 100);
  // Without a target the budget is left alone.
  cfg.min_errors = 0;
  CHECK(run_sweep(model, cfg).points[0].trials == 100);
}

TEST_CASE("flat detection") {
  SweepCurve curve;
  for (double s : {1e-4, 1e-5, 1e-6}) {
    SweepPoint p;
    p.sigma2 = s;
    p.value = 0.1;
    p.lo = 0.09;
    p.hi = 0.11;
    curve.points.push_back(p);
  }
  CHECK(flat_within_ci(curve, 2));
  curve.points[2].lo = 0.01;
  curve.points[2].hi = 0.02;
  CHECK_FALSE(flat_within_ci(curve, 2));
  CHECK(flat_within_ci(curve, 0));
}

TEST_CASE("region map: staircase, monotonicity, empty predicates") {
  const JointGmm gauss = gaussian_334_model(3);
  const GeometryTable geo = geometry_summary(gauss);
  const RegionGrid grid = region_map(gauss, geo, {0, 5}, {0, 5}, {"gaussian"});
  CHECK(grid.cells.size() == 36);
  CHECK(grid.csv().rows() == 36);
  for (const RegionCell& c : grid.cells) {
    const bool pass = c.m1 >= 3 || (c.m1 >= 1 && c.m1 + c.m2 >= 4);
    CHECK((c.verdicts[0] == "transition") == pass);
  }
  const RegionGrid none = region_map(gauss, geo, {1, 2}, {0, 0}, {});
  CHECK(none.cells.size() == 2);
  CHECK(none.cells[0].verdicts.empty());
  CHECK(none.csv().header().size() == 2);

  const std::vector<std::string> tags{"zero_mean_side_info", "zero_mean_distributed", "gmm_sufficient",
                                      "gmm_necessary", "dist_gmm_sufficient", "dist_gmm_necessary"};
  const std::vector<std::string> good{"phase_transition", "phase_transition", "transition", "transition",
                                      "transition", "transition"};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const JointGmm model = testmodels::atom_model(seed);
    const GeometryTable g = geometry_summary(model);
    const RegionGrid r = region_map(model, g, {0, 8}, {0, 7}, tags);
    auto at = [&](int a, int b) -> const RegionCell& { return r.cells[static_cast<std::size_t>(a * 8 + b)]; };
    for (std::size_t t = 0; t < tags.size(); ++t)
      for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 7; ++b) {
          if (at(a, b).verdicts[t] != good[t]) continue;
          if (a < 8) CHECK(at(a + 1, b).verdicts[t] == good[t]);
          if (b < 7) CHECK(at(a, b + 1).verdicts[t] == good[t]);
        }
  }
  CHECK_THROWS_AS(region_map(gauss, geo, {3, 2}, {0, 1}, {}), Error);
}

TEST_CASE("region map probe agrees with the Gaussian predicate") {
  const JointGmm gauss = gaussian_334_model(1);
  const GeometryTable geo = geometry_summary(gauss);
  ProbeConfig probe;
  probe.task = Task::kReconstructSi;
  probe.trials = 100;
  const RegionGrid grid = region_map(gauss, geo, {0, 5}, {0, 5}, {"gaussian"}, probe);
  for (const RegionCell& c : grid.cells) {
    INFO("m1=", c.m1, " m2=", c.m2);
    CHECK(*c.probe == (c.verdicts[0] == "transition" ? "transition" : "floor"));
  }
}

TEST_CASE("verdict tables") {
  const GeometryTable geo = geometry_summary(two_signal_model(1));
  const Verdict v = classification_phase_verdict(geo, 6, 4, ClassifyMode::kSideInfo);
  const CsvTable t = classification_verdict_csv({{ClassifyMode::kSideInfo, v}}, {{6, 4}});
  CHECK(t.header().size() == 11);
  CHECK(t.data()[0][3] == "phase_transition");
  CHECK(t.data()[0][9] == "0.5");
  const ReconVerdict r = reconstruction_phase_verdict(geo, 5, 4, ReconTheorem::kGmmSufficient);
  const CsvTable rt = reconstruction_verdict_csv({r}, {{5, 4}});
  CHECK(rt.data()[0][3] == "no_transition");
  CHECK_FALSE(rt.data()[0][4].empty());
}
