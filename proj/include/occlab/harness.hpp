#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "occlab/estimators.hpp"
#include "occlab/process.hpp"
#include "occlab/rng.hpp"
#include "occlab/test_function.hpp"
#include "occlab/theory.hpp"

namespace occlab {

enum class ExperimentKind { RateStudy, CLTStudy, LocalTimeStudy, EfficiencyStudy, TScalingStudy };

std::string_view to_string(ExperimentKind kind) noexcept;

struct ExperimentConfig {
  ProcessSpec process;
  /// Name of the process entry in the config file ("bm", "ou", ...), kept
  /// for reports.
  std::string process_label = "bm";
  std::string function_id = "indicator:0:1";
  std::vector<std::size_t> n_ladder = {64, 128, 256, 512, 1024, 2048, 4096};
  std::size_t replications = 2000;
  std::size_t oracle_factor = 64;
  /// Fine resolution; defaults to oracle_factor * max(n_ladder).
  std::optional<std::size_t> n_fine;
  SeedPolicy seed{20240611};
  ExperimentKind kind = ExperimentKind::RateStudy;
  /// Exclude the smallest ladder point from rate fits.
  bool drop_smallest = true;
  /// Worker threads; 0 uses every core. Results do not depend on it.
  std::size_t threads = 0;
  RateOptions rate_options;

  // Local-time study.
  double level = 0.0;
  double rho = 0.01;
  /// Additional levels evaluated on the same paths.
  std::vector<double> extra_levels;

  // Efficiency study: bridge fill-ins per skeleton.
  std::size_t inner_samples = 4;

  // T-scaling study.
  std::vector<double> t_ladder = {1, 2, 4, 8, 16};
  double fixed_dt = 1.0 / 128.0;

  /// Window of the compactified identity; chosen as 6 std(X_T) when empty.
  std::optional<double> identity_window;

  std::size_t resolved_n_fine() const;
  /// Parameter error on an inconsistent config.
  void validate() const;
};

struct ErrorSample {
  std::size_t n = 0;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t replicate = 0;
  double error = 0.0;  // estimator - oracle
  EstimatorKind estimator = EstimatorKind::Riemann;
};

struct LadderPoint {
  std::size_t n = 0;
  double dt = 0.0;
  double l2_error = 0.0;
  /// Monte Carlo standard error of l2_error (delta method).
  double standard_error = 0.0;
  double mean_error = 0.0;
};

struct ErrorTable {
  std::string function_id;
  std::vector<LadderPoint> rows;
  std::vector<ErrorSample> samples;
  /// Share of replicates whose path left the flat window of a compactified
  /// identity (0 for other functions).
  double overflow_fraction = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  std::vector<double> residuals;
};

/// Window of the compactified identity: 6 std(X_T), exact for Brownian
/// motion and fBM, from a 400-path pilot run otherwise.
double identity_window_for(const ProcessSpec& spec, SeedPolicy seed);

/// The function named by the config, with the identity window resolved.
TestFunction resolve_function(const ExperimentConfig& config);

/// Smoothness used for rate predictions: the declared index capped at the
/// largest s the catalog covers for the model.
double prediction_smoothness(const ProcessSpec& spec, const TestFunction& f);

/// L2 error of the Riemann sum (or trapezoid) against the fine-grid oracle
/// at each ladder point; all estimates of one replicate come from one path.
ErrorTable run_error_experiment(const ExperimentConfig& config,
                                EstimatorKind estimator = EstimatorKind::Riemann,
                                bool keep_samples = false);

/// Least squares of log error on log dt. Fit error on nonpositive errors or
/// fewer than 3 usable points.
RateFit fit_rate(const std::vector<LadderPoint>& rows, bool drop_smallest = true);

struct RateStudyResult {
  ErrorTable table;
  RateFit fit;
  std::optional<RatePrediction> prediction;
  /// Set when the catalog has no rate for the pair.
  std::string coverage_note;
  double deviation = 0.0;  // |fit.slope - prediction.delta_exponent|
};

RateStudyResult rate_study(const ExperimentConfig& config, bool keep_samples = false);

struct CltDiagnostics {
  std::size_t n = 0;
  std::size_t replications = 0;
  std::size_t excluded_count = 0;
  bool valid = true;  // exclusions at most 5%
  double ks_distance = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  /// Riemann error standardized the same way, replicate by replicate.
  double riemann_mean = 0.0;
  double riemann_variance = 0.0;
  double riemann_second_moment = 0.0;
  /// Both errors standardized by the pooled mean of AVAR-hat; the ratio of
  /// their second moments equals MSE(Riemann) / MSE(trapezoid).
  double pooled_trapezoid_second_moment = 0.0;
  double pooled_riemann_second_moment = 0.0;
  double empirical_ratio = 0.0;
  /// 1 + 3 E[(f(X_T) - f(X_0))^2] / E[int |sigma^T grad f|^2 dr], by oracle MC.
  double predicted_ratio = 0.0;
  std::vector<double> statistics;
};

CltDiagnostics clt_experiment(const ExperimentConfig& config);

struct EfficiencyPoint {
  std::size_t n = 0;
  double dt = 0.0;
  double riemann_error = 0.0;
  double trapezoid_error = 0.0;
  /// sqrt(E[Var(Gamma | skeleton)]), from the unbiased spread of each
  /// replicate's fill-ins around their mean.
  double bridge_error = 0.0;
  /// Error of the family mean against its own fill-ins. Riemann and
  /// trapezoid errors dominate it replicate by replicate.
  double bridge_family_error = 0.0;
  double predicted_floor = 0.0;
  double riemann_stderr = 0.0;
  double trapezoid_stderr = 0.0;
  double bridge_stderr = 0.0;
  double floor_stderr = 0.0;
  /// Replicates where the family inequality failed; 0 up to rounding.
  std::size_t family_violations = 0;
};

struct EfficiencyResult {
  std::vector<EfficiencyPoint> points;
  std::size_t inner_samples = 0;
};

/// For each ladder n and replicate, a Brownian skeleton gets
/// `inner_samples` exact bridge fill-ins with oracle_factor sub-steps per
/// interval. Each fill-in is an exact fine path and serves as the truth for
/// the estimators; the bridge estimate is the mean over the family.
EfficiencyResult efficiency_experiment(const ExperimentConfig& config);

struct LocalTimePoint {
  std::size_t n = 0;
  double dt = 0.0;
  double bandwidth = 0.0;
  double l2_error = 0.0;
  double standard_error = 0.0;
  /// L2 error against the oracle with half the kernel width.
  double l2_error_half_oracle = 0.0;
  /// |l2_error_half_oracle - l2_error| / l2_error.
  double oracle_sensitivity = 0.0;
  /// L2 size of the oracle change itself, relative to l2_error.
  double pathwise_oracle_change = 0.0;
};

struct LocalTimeLevel {
  double level = 0.0;
  std::vector<LocalTimePoint> points;
  RateFit fit;
};

struct LocalTimeResult {
  double hurst = 0.5;
  double rho = 0.01;
  double exponent = 0.0;       // alpha_H
  double oracle_bandwidth = 0.0;
  double max_sensitivity = 0.0;
  bool gate_passed = true;     // max_sensitivity < 10%
  RatePrediction prediction;
  std::vector<LocalTimeLevel> levels;  // config.level first, then extra_levels
};

/// Oracle error when halving the oracle kernel moves some L2 error by 10%
/// or more, unless abort_on_gate is false (then only gate_passed is cleared).
LocalTimeResult local_time_experiment(const ExperimentConfig& config, bool abort_on_gate = true);

struct TScalingPoint {
  double horizon = 0.0;
  std::size_t n = 0;
  double l2_error = 0.0;
  double standard_error = 0.0;
  double overflow_fraction = 0.0;
};

struct TScalingResult {
  std::vector<TScalingPoint> points;
  RateFit fit;  // slope = fitted T exponent
  double window = 0.0;
  bool overflow_flag = false;  // some horizon exceeded 1% window exits
  std::optional<RatePrediction> prediction;
};

TScalingResult t_scaling_experiment(const ExperimentConfig& config);

}  // namespace occlab
