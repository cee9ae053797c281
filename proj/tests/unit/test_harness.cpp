#include <doctest.h>

#include <cmath>
#include <vector>

#include "occlab/error.hpp"
#include "occlab/estimators.hpp"
#include "occlab/harness.hpp"
#include "occlab/simulate.hpp"

using namespace occlab;

namespace {

ExperimentConfig small(std::string function_id, std::size_t reps = 50) {
  ExperimentConfig c;
  c.function_id = std::move(function_id);
  c.n_ladder = {16, 32, 64, 128};
  c.replications = reps;
  c.oracle_factor = 16;
  c.threads = 1;
  return c;
}

std::vector<LadderPoint> synthetic(double exponent, bool with_log) {
  std::vector<LadderPoint> rows;
  for (std::size_t n = 64; n <= 4096; n *= 2) {
    LadderPoint p;
    p.n = n;
    p.dt = 1.0 / static_cast<double>(n);
    p.l2_error = std::pow(p.dt, exponent) * (with_log ? std::sqrt(std::log(double(n))) : 1.0);
    rows.push_back(p);
  }
  return rows;
}

}  // namespace

TEST_CASE("a constant function has zero error at every n") {
  auto c = small("indicator:-1000:1000", 1);
  const auto t = run_error_experiment(c);
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) CHECK(r.l2_error <= 1e-13);
}

TEST_CASE("errors decrease along the ladder, each step several standard errors") {
  ExperimentConfig c;
  c.function_id = "gauss:0:1";
  c.n_ladder = {64, 128, 256, 512, 1024, 2048, 4096};
  c.replications = 500;
  c.threads = 1;
  const auto t = run_error_experiment(c);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const auto& a = t.rows[i - 1];
    const auto& b = t.rows[i];
    CHECK(b.l2_error < a.l2_error);
    CHECK(a.l2_error - b.l2_error >= 3 * std::hypot(a.standard_error, b.standard_error));
  }
}

TEST_CASE("doubling R is consistent within Monte Carlo error") {
  auto c = small("indicator:0:1", 200);
  const auto a = run_error_experiment(c);
  c.replications = 400;
  const auto b = run_error_experiment(c);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double se = std::hypot(a.rows[i].standard_error, b.rows[i].standard_error);
    CHECK(std::abs(a.rows[i].l2_error - b.rows[i].l2_error) <= 3 * se);
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto c = small("hat:0:0.5", 40);
  c.process = ProcessSpec::fbm(0.3);
  c.process_label = "fbm";
  c.threads = 1;
  const auto a = run_error_experiment(c, EstimatorKind::Riemann, true);
  c.threads = 3;
  const auto b = run_error_experiment(c, EstimatorKind::Riemann, true);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].error == b.samples[i].error);
    CHECK(a.samples[i].replicate == b.samples[i].replicate);
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].l2_error == b.rows[i].l2_error);
}

TEST_CASE("every estimate of a replicate comes from one fine path") {
  auto c = small("gauss:0:1", 6);
  c.process = ProcessSpec::diffusion(ornstein_uhlenbeck());
  const auto t = run_error_experiment(c, EstimatorKind::Trapezoid, true);
  const auto f = gaussian_bump(0.0, 1.0);
  for (const auto& s : t.samples) {
    const auto fine = simulate(c.process, c.resolved_n_fine(), c.seed, s.replicate);
    const auto skel = subsample(fine, s.n);
    // value-subset: skeleton values are fine-path values
    const std::size_t stride = c.resolved_n_fine() / s.n;
    for (std::size_t k = 0; k <= s.n; ++k) REQUIRE(skel.value(k) == fine.value(k * stride));
    const double e = trapezoid(skel, f, 1.0) - occupation_oracle(fine, f, 1.0);
    CHECK(s.error == doctest::Approx(e).epsilon(1e-12).scale(1e-15));
  }
}

TEST_CASE("oracle resolution is enforced") {
  auto c = small("gauss:0:1", 2);
  c.oracle_factor = 16;
  c.n_fine = 128 * 8;
  CHECK_THROWS_AS(run_error_experiment(c), OracleError);
}

TEST_CASE("fit_rate on synthetic tables") {
  const auto exact = fit_rate(synthetic(0.75, false), false);
  CHECK(std::abs(exact.slope - 0.75) <= 1e-12);
  CHECK(exact.points_used == 7);
  const auto logged = fit_rate(synthetic(1.0, true), false);
  CHECK(logged.slope > 0.9);
  CHECK(logged.slope < 1.0);
  CHECK(fit_rate(synthetic(0.75, false), true).points_used == 6);

  auto bad = synthetic(0.75, false);
  bad[3].l2_error = 0.0;
  CHECK_THROWS_AS(fit_rate(bad, false), FitError);
  auto few = synthetic(0.75, false);
  few.resize(3);
  CHECK_THROWS_AS(fit_rate(few, true), FitError);
  CHECK(fit_rate(few, false).points_used == 3);
}

TEST_CASE("smoother functions converge faster") {
  auto c = small("indicator:0:1", 400);
  c.n_ladder = {32, 64, 128, 256, 512};
  const auto rough = rate_study(c);
  c.function_id = "hat:0:1";
  const auto smooth = rate_study(c);
  CHECK(rough.fit.slope + 2 * std::hypot(rough.fit.slope_stderr, smooth.fit.slope_stderr) <
        smooth.fit.slope);
  REQUIRE(rough.prediction);
  CHECK(rough.deviation == doctest::Approx(std::abs(rough.fit.slope -
                                                    rough.prediction->delta_exponent)));
}

TEST_CASE("predictions cap the smoothness of stable processes at gamma / 2") {
  auto c = small("gauss:0:1", 4);
  c.process = ProcessSpec::stable(1.0, 0.5);
  c.process_label = "stable";
  const auto r = rate_study(c);
  // s is capped at gamma/2 for the prediction, so a rate exists.
  REQUIRE(r.prediction);
  CHECK(r.prediction->delta_exponent == doctest::Approx(1.0));
  CHECK(prediction_smoothness(c.process, gaussian_bump(0, 1)) == doctest::Approx(0.5));
}

TEST_CASE("config validation") {
  auto c = small("gauss:0:1");
  c.n_ladder = {16, 48};
  c.n_fine = 1024;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("does not divide"), ConfigError);
  c = small("gauss:0:1");
  c.n_ladder = {32, 16, 64};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small("gauss:0:1");
  c.kind = ExperimentKind::EfficiencyStudy;
  c.process = ProcessSpec::fbm(0.3);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small("gauss:0:1");
  c.kind = ExperimentKind::LocalTimeStudy;
  c.process = ProcessSpec::fbm(0.5);
  c.rho = 0.6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small("nope");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small("gauss:0:1");
  CHECK_NOTHROW(c.validate());
  CHECK(c.resolved_n_fine() == 16 * 128);
}

TEST_CASE("identity window") {
  CHECK(identity_window_for(ProcessSpec::brownian(1, 4.0), SeedPolicy{1}) ==
        doctest::Approx(12.0));
  CHECK(identity_window_for(ProcessSpec::fbm(0.7, 2.0), SeedPolicy{1}) ==
        doctest::Approx(6.0 * std::pow(2.0, 0.7)));
  const double ou = identity_window_for(ProcessSpec::diffusion(ornstein_uhlenbeck()), SeedPolicy{1});
  // Var X_1 = (1 - e^{-2}) / 2 for the unit OU process from 0.
  CHECK(ou == doctest::Approx(6.0 * std::sqrt((1 - std::exp(-2.0)) / 2)).epsilon(0.15));
}

TEST_CASE("CLT diagnostics on a small run") {
  auto c = small("gauss:0:1", 200);
  c.kind = ExperimentKind::CLTStudy;
  c.n_ladder = {256};
  const auto d = clt_experiment(c);
  CHECK(d.n == 256);
  CHECK(d.statistics.size() + d.excluded_count == 200);
  CHECK(d.valid);
  CHECK(d.ks_distance < 0.15);
  CHECK(d.predicted_ratio > 1.0);
  CHECK(d.riemann_variance > d.variance);
}

TEST_CASE("efficiency: the family mean is dominated replicate by replicate") {
  auto c = small("gauss:0:1", 60);
  c.kind = ExperimentKind::EfficiencyStudy;
  c.n_ladder = {16, 64};
  c.inner_samples = 4;
  const auto r = efficiency_experiment(c);
  REQUIRE(r.points.size() == 2);
  for (const auto& p : r.points) {
    CHECK(p.family_violations == 0);
    CHECK(p.bridge_family_error <= p.trapezoid_error);
    CHECK(p.bridge_family_error <= p.riemann_error);
    CHECK(p.predicted_floor > 0.0);
  }
  CHECK(r.points[1].predicted_floor < r.points[0].predicted_floor);
}

TEST_CASE("local-time study runs and reports per level") {
  ExperimentConfig c;
  c.kind = ExperimentKind::LocalTimeStudy;
  c.process = ProcessSpec::fbm(0.5);
  c.process_label = "fbm";
  c.n_ladder = {16, 32, 64, 128};
  c.oracle_factor = 32;
  c.replications = 40;
  c.extra_levels = {0.5};
  c.threads = 1;
  const auto r = local_time_experiment(c, false);
  REQUIRE(r.levels.size() == 2);
  CHECK(r.levels[1].level == 0.5);
  CHECK(r.exponent == doctest::Approx(0.49));
  CHECK(r.prediction.delta_exponent == doctest::Approx(0.24));
  for (const auto& p : r.levels[0].points) {
    CHECK(p.bandwidth == doctest::Approx(std::pow(p.dt, 0.49)));
    CHECK(p.l2_error > 0.0);
  }
}

TEST_CASE("T-scaling study") {
  ExperimentConfig c;
  c.kind = ExperimentKind::TScalingStudy;
  c.function_id = "identity";
  c.t_ladder = {1, 2, 4};
  c.fixed_dt = 1.0 / 32;
  c.oracle_factor = 8;
  c.replications = 100;
  c.threads = 1;
  const auto r = t_scaling_experiment(c);
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[2].n == 128);
  CHECK(r.window == doctest::Approx(12.0));
  CHECK_FALSE(r.overflow_flag);
  REQUIRE(r.prediction);
  CHECK(r.prediction->T_exponent == 0.5);
}
