#include "occlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "occlab/error.hpp"
#include "occlab/parallel.hpp"
#include "occlab/simulate.hpp"
#include "occlab/stats.hpp"

namespace occlab {

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::RateStudy: return "rate-study";
    case ExperimentKind::CLTStudy: return "clt-study";
    case ExperimentKind::LocalTimeStudy: return "local-time";
    case ExperimentKind::EfficiencyStudy: return "efficiency";
    case ExperimentKind::TScalingStudy: return "t-scaling";
  }
  return "unknown";
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double mean_of(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

// sqrt(mean(sq)) and its delta-method standard error.
std::pair<double, double> root_mean_square(const std::vector<double>& sq) {
  const Moments m = moments(sq);
  const double rms = std::sqrt(std::max(m.mean, 0.0));
  const double se = rms > 0.0 ? m.standard_error() / (2.0 * rms) : 0.0;
  return {rms, se};
}

// Calls body(replicate, path) for replicates 0..count-1. fBM paths come in
// pairs from one circulant draw, so the work unit is a pair there.
void for_each_path(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                   std::size_t count, std::size_t threads,
                   const std::function<void(std::uint64_t, const PathGrid&)>& body) {
  if (spec.kind() == ProcessKind::FractionalBM) {
    parallel_for((count + 1) / 2, threads, [&](std::size_t i) {
      auto [a, b] = simulate_fbm_pair(spec, n_fine, seed, i);
      body(2 * i, a);
      if (2 * i + 1 < count) body(2 * i + 1, b);
    });
    return;
  }
  parallel_for(count, threads, [&](std::size_t r) {
    body(r, simulate(spec, n_fine, seed, r));
  });
}

void eval_path(const PathGrid& path, const TestFunction& f, std::vector<double>& out) {
  out.resize(path.size());
  if (path.dim() == 1) {
    f.eval_many(path.values(), out);
  } else {
    for (std::size_t i = 0; i < path.size(); ++i) out[i] = f.eval(path.point(i));
  }
}

// Largest |x| along the path, over all coordinates.
double path_sup(const PathGrid& path) {
  double m = 0.0;
  for (double v : path.values()) m = std::max(m, std::abs(v));
  return m;
}

RateFit to_rate_fit(const LinearFit& lf) {
  RateFit out;
  out.slope = lf.slope;
  out.intercept = lf.intercept;
  out.slope_stderr = lf.slope_stderr;
  out.r_squared = lf.r_squared;
  out.points_used = lf.points;
  out.residuals = lf.residuals;
  return out;
}

void require_oracle_resolution(const ExperimentConfig& c) {
  const std::size_t n_fine = c.resolved_n_fine();
  const std::size_t n_max = c.n_ladder.back();
  if (n_fine < c.oracle_factor * n_max) {
    throw OracleError("oracle resolution too coarse: n_fine = " + std::to_string(n_fine) +
                      " is below oracle_factor x max(n_ladder) = " +
                      std::to_string(c.oracle_factor * n_max));
  }
}

}  // namespace

std::size_t ExperimentConfig::resolved_n_fine() const {
  if (n_fine) return *n_fine;
  if (n_ladder.empty()) return 0;
  return oracle_factor * n_ladder.back();
}

void ExperimentConfig::validate() const {
  try {
    process.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("process: ") + e.what());
  }
  if (replications < 1) throw ConfigError("replications: must be at least 1");
  if (oracle_factor < 1) throw ConfigError("oracle_factor: must be at least 1");
  if (kind != ExperimentKind::LocalTimeStudy && !is_valid_function_id(function_id)) {
    throw ConfigError("function: invalid function id '" + function_id + "'");
  }
  if (kind == ExperimentKind::TScalingStudy) {
    if (t_ladder.empty()) throw ConfigError("t_ladder: must not be empty");
    if (!(fixed_dt > 0.0)) throw ConfigError("fixed_dt: must be positive");
    for (std::size_t i = 0; i < t_ladder.size(); ++i) {
      const double t = t_ladder[i];
      if (!(t > 0.0)) throw ConfigError("t_ladder: horizons must be positive");
      if (i > 0 && !(t > t_ladder[i - 1])) {
        throw ConfigError("t_ladder: must be strictly increasing");
      }
      const double steps = t / fixed_dt;
      if (std::abs(steps - std::round(steps)) > 1e-9 * steps || steps < 1.0) {
        throw ConfigError("t_ladder: fixed_dt = " + num(fixed_dt) + " does not divide T = " +
                          num(t));
      }
    }
    return;
  }
  if (n_ladder.empty()) throw ConfigError("n_ladder: must not be empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] == 0) throw ConfigError("n_ladder: entries must be positive");
    if (i > 0 && n_ladder[i] <= n_ladder[i - 1]) {
      throw ConfigError("n_ladder: must be strictly increasing");
    }
  }
  const std::size_t nf = resolved_n_fine();
  for (std::size_t n : n_ladder) {
    if (nf % n != 0) {
      throw ConfigError("n_ladder: n = " + std::to_string(n) + " does not divide n_fine = " +
                        std::to_string(nf));
    }
  }
  if (kind == ExperimentKind::EfficiencyStudy) {
    if (process.kind() != ProcessKind::BrownianMotion) {
      throw ConfigError("process: the efficiency study needs Brownian motion");
    }
    if (inner_samples < 2) throw ConfigError("inner_samples: must be at least 2");
  }
  if (kind == ExperimentKind::LocalTimeStudy) {
    if (process.dim != 1 || (process.kind() != ProcessKind::FractionalBM &&
                             process.kind() != ProcessKind::BrownianMotion)) {
      throw ConfigError("process: the local-time study needs a scalar fBM or Brownian motion");
    }
    try {
      local_time_exponent(hurst_of(process), rho);
    } catch (const Error& e) {
      throw ConfigError(std::string("rho: ") + e.what());
    }
  }
}

double identity_window_for(const ProcessSpec& spec, SeedPolicy seed) {
  const double T = spec.horizon;
  const bool origin = std::holds_alternative<PointLaw>(spec.initial_law);
  double shift = 0.0;
  if (origin) {
    for (double v : std::get<PointLaw>(spec.initial_law).x0) shift = std::max(shift, std::abs(v));
  }
  if (origin && spec.dim == 1 && spec.kind() == ProcessKind::BrownianMotion) {
    return shift + 6.0 * std::sqrt(T);
  }
  if (origin && spec.kind() == ProcessKind::FractionalBM) {
    return shift + 6.0 * std::pow(T, hurst_of(spec));
  }
  // Pilot run on its own seed so it never shares draws with the experiment.
  constexpr std::size_t kPilot = 400;
  constexpr std::size_t kPilotSteps = 256;
  const SeedPolicy pilot{seed.master_seed ^ 0x9E3779B97F4A7C15ull};
  std::vector<double> end(kPilot * spec.dim);
  for (std::size_t r = 0; r < kPilot; ++r) {
    const PathGrid p = simulate(spec, kPilotSteps, pilot, r);
    for (std::size_t j = 0; j < spec.dim; ++j) end[r * spec.dim + j] = p.value(p.size() - 1, j);
  }
  double window = 0.0;
  for (std::size_t j = 0; j < spec.dim; ++j) {
    std::vector<double> col(kPilot);
    for (std::size_t r = 0; r < kPilot; ++r) col[r] = end[r * spec.dim + j];
    const Moments m = moments(col);
    window = std::max(window, std::abs(m.mean) + 6.0 * std::sqrt(m.variance));
  }
  if (!(window > 0.0)) throw NumericError("pilot run gave a degenerate identity window");
  return window;
}

TestFunction resolve_function(const ExperimentConfig& config) {
  std::optional<double> window = config.identity_window;
  if (!window && config.function_id == "identity") {
    ProcessSpec at_end = config.process;
    if (config.kind == ExperimentKind::TScalingStudy && !config.t_ladder.empty()) {
      at_end.horizon = config.t_ladder.back();
    }
    window = identity_window_for(at_end, config.seed);
  }
  return parse_function_id(config.function_id, window);
}

double prediction_smoothness(const ProcessSpec& spec, const TestFunction& f) {
  double s = std::min(f.smoothness(), 1.0);
  if (spec.kind() == ProcessKind::SymmetricStable) {
    s = std::min(s, 0.5 * std::get<StableParams>(spec.params).stability);
  }
  return s;
}

namespace {

std::optional<double> identity_window_of(const ExperimentConfig& config, const TestFunction& f) {
  if (f.kind() != FunctionKind::IdentityCompactified) return std::nullopt;
  if (config.identity_window) return config.identity_window;
  const auto& id = config.function_id;
  if (id.rfind("identity:", 0) == 0) return std::stod(id.substr(9));
  ProcessSpec at_end = config.process;
  if (config.kind == ExperimentKind::TScalingStudy && !config.t_ladder.empty()) {
    at_end.horizon = config.t_ladder.back();
  }
  return identity_window_for(at_end, config.seed);
}

}  // namespace

ErrorTable run_error_experiment(const ExperimentConfig& config, EstimatorKind estimator,
                                bool keep_samples) {
  config.validate();
  if (estimator != EstimatorKind::Riemann && estimator != EstimatorKind::Trapezoid) {
    throw ParameterError("run_error_experiment supports the riemann and trapezoid estimators");
  }
  require_oracle_resolution(config);
  const TestFunction f = resolve_function(config);
  const std::optional<double> window = identity_window_of(config, f);
  const std::size_t n_fine = config.resolved_n_fine();
  const std::size_t R = config.replications;
  const std::size_t L = config.n_ladder.size();
  const double T = config.process.horizon;
  const double dt_fine = T / static_cast<double>(n_fine);

  std::vector<double> err(R * L);
  std::vector<char> overflow(R, 0);
  for_each_path(config.process, n_fine, config.seed, R, config.threads,
                [&](std::uint64_t r, const PathGrid& path) {
                  std::vector<double> fx;
                  eval_path(path, f, fx);
                  const double oracle = trapezoid_from_values(fx, 1, n_fine, dt_fine);
                  for (std::size_t j = 0; j < L; ++j) {
                    const std::size_t n = config.n_ladder[j];
                    const std::size_t stride = n_fine / n;
                    const double dt = T / static_cast<double>(n);
                    const double est = estimator == EstimatorKind::Riemann
                                           ? riemann_from_values(fx, stride, n, dt)
                                           : trapezoid_from_values(fx, stride, n, dt);
                    err[r * L + j] = est - oracle;
                  }
                  if (window && path_sup(path) > *window) overflow[r] = 1;
                });

  ErrorTable table;
  table.function_id = f.id();
  std::vector<double> sq(R), e(R);
  for (std::size_t j = 0; j < L; ++j) {
    for (std::size_t r = 0; r < R; ++r) {
      e[r] = err[r * L + j];
      sq[r] = e[r] * e[r];
      if (!std::isfinite(e[r])) {
        throw NumericError("non-finite error at n = " + std::to_string(config.n_ladder[j]) +
                           ", replicate " + std::to_string(r));
      }
    }
    LadderPoint p;
    p.n = config.n_ladder[j];
    p.dt = T / static_cast<double>(p.n);
    std::tie(p.l2_error, p.standard_error) = root_mean_square(sq);
    p.mean_error = mean_of(e);
    table.rows.push_back(p);
  }
  if (keep_samples) {
    table.samples.reserve(R * L);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t j = 0; j < L; ++j) {
        table.samples.push_back({config.n_ladder[j], table.rows[j].dt, T, r, err[r * L + j],
                                 estimator});
      }
    }
  }
  table.overflow_fraction =
      static_cast<double>(std::count(overflow.begin(), overflow.end(), 1)) /
      static_cast<double>(R);
  return table;
}

RateFit fit_rate(const std::vector<LadderPoint>& rows, bool drop_smallest) {
  std::vector<LadderPoint> used(rows.begin(), rows.end());
  std::sort(used.begin(), used.end(),
            [](const LadderPoint& a, const LadderPoint& b) { return a.n < b.n; });
  if (drop_smallest && !used.empty()) used.erase(used.begin());
  if (used.size() < 3) {
    throw FitError("rate fit needs at least 3 ladder points, got " + std::to_string(used.size()));
  }
  std::vector<double> x, y;
  for (const auto& p : used) {
    if (!(p.l2_error > 0.0) || !std::isfinite(p.l2_error)) {
      throw FitError("nonpositive error " + num(p.l2_error) + " at n = " + std::to_string(p.n));
    }
    if (!(p.dt > 0.0)) throw FitError("nonpositive dt at n = " + std::to_string(p.n));
    x.push_back(std::log(p.dt));
    y.push_back(std::log(p.l2_error));
  }
  return to_rate_fit(least_squares(x, y));
}

RateStudyResult rate_study(const ExperimentConfig& config, bool keep_samples) {
  RateStudyResult out;
  out.table = run_error_experiment(config, EstimatorKind::Riemann, keep_samples);
  out.fit = fit_rate(out.table.rows, config.drop_smallest);
  const TestFunction f = resolve_function(config);
  try {
    out.prediction = theoretical_rate(config.process, prediction_smoothness(config.process, f),
                                      ErrorContext::L2Error, config.rate_options);
    out.deviation = std::abs(out.fit.slope - out.prediction->delta_exponent);
  } catch (const CoverageError& e) {
    out.coverage_note = e.what();
  }
  return out;
}

CltDiagnostics clt_experiment(const ExperimentConfig& config) {
  config.validate();
  const ProcessKind pk = config.process.kind();
  if (pk != ProcessKind::BrownianMotion && pk != ProcessKind::ItoDiffusion) {
    throw ModelError("the CLT study needs a continuous Ito semimartingale (bm or diffusion)");
  }
  const TestFunction f = resolve_function(config);
  if (!f.supports_gradient()) {
    throw CapabilityError("the CLT study needs a function with a gradient; " + f.id() +
                          " has none");
  }
  require_oracle_resolution(config);
  const std::size_t n = config.n_ladder.back();
  const std::size_t n_fine = config.resolved_n_fine();
  const std::size_t stride = n_fine / n;
  const std::size_t R = config.replications;
  const std::size_t d = config.process.dim;
  const double T = config.process.horizon;
  const double dt = T / static_cast<double>(n);
  const double dt_fine = T / static_cast<double>(n_fine);
  const DiffusionParams* diff = std::get_if<DiffusionParams>(&config.process.params);

  std::vector<double> oracle(R), theta(R), riem(R), avar(R), jump_sq(R), grad_int(R);
  for_each_path(config.process, n_fine, config.seed, R, config.threads,
                [&](std::uint64_t r, const PathGrid& path) {
                  std::vector<double> fx, gsq(path.size()), g(d), sig(d * d);
                  eval_path(path, f, fx);
                  oracle[r] = trapezoid_from_values(fx, 1, n_fine, dt_fine);
                  theta[r] = trapezoid_from_values(fx, stride, n, dt);
                  riem[r] = riemann_from_values(fx, stride, n, dt);
                  const double df = fx[n_fine] - fx[0];
                  jump_sq[r] = df * df;
                  // |sigma^T grad f|^2 along the fine path.
                  for (std::size_t i = 0; i < path.size(); ++i) {
                    const auto x = path.point(i);
                    f.gradient(x, g);
                    double acc = 0.0;
                    if (diff) {
                      diff->diffusion(x, sig);
                      for (std::size_t c = 0; c < d; ++c) {
                        double v = 0.0;
                        for (std::size_t k = 0; k < d; ++k) v += sig[k * d + c] * g[k];
                        acc += v * v;
                      }
                    } else {
                      for (double gk : g) acc += gk * gk;
                    }
                    gsq[i] = acc;
                  }
                  grad_int[r] = trapezoid_from_values(gsq, 1, n_fine, dt_fine);
                  // AVAR-hat on the skeleton, written out to avoid a copy.
                  double a = 0.0;
                  for (std::size_t k = 0; k < n; ++k) {
                    const auto x0 = path.point(k * stride);
                    const auto x1 = path.point((k + 1) * stride);
                    f.gradient(x0, g);
                    double inner = 0.0;
                    for (std::size_t j = 0; j < d; ++j) inner += g[j] * (x1[j] - x0[j]);
                    a += inner * inner;
                  }
                  avar[r] = a / 12.0;
                });

  CltDiagnostics out;
  out.n = n;
  out.replications = R;
  std::vector<double> zr, used_avar, et, er;
  for (std::size_t r = 0; r < R; ++r) {
    const auto z = standardized_error(oracle[r], theta[r], avar[r], dt);
    if (!z) {
      ++out.excluded_count;
      continue;
    }
    out.statistics.push_back(*z);
    zr.push_back((oracle[r] - riem[r]) / (dt * std::sqrt(avar[r])));
    used_avar.push_back(avar[r]);
    et.push_back(oracle[r] - theta[r]);
    er.push_back(oracle[r] - riem[r]);
  }
  out.valid = static_cast<double>(out.excluded_count) <= 0.05 * static_cast<double>(R);
  if (out.statistics.size() < 2) {
    out.valid = false;
    return out;
  }
  const Moments mt = moments(out.statistics);
  out.mean = mt.mean;
  out.variance = mt.variance;
  out.ks_distance = ks_distance_normal(out.statistics);
  const Moments mr = moments(zr);
  out.riemann_mean = mr.mean;
  out.riemann_variance = mr.variance;
  std::vector<double> sq(zr.size());
  for (std::size_t i = 0; i < zr.size(); ++i) sq[i] = zr[i] * zr[i];
  out.riemann_second_moment = mean_of(sq);

  const double scale = dt * dt * mean_of(used_avar);
  for (std::size_t i = 0; i < et.size(); ++i) sq[i] = et[i] * et[i] / scale;
  out.pooled_trapezoid_second_moment = mean_of(sq);
  for (std::size_t i = 0; i < er.size(); ++i) sq[i] = er[i] * er[i] / scale;
  out.pooled_riemann_second_moment = mean_of(sq);
  out.empirical_ratio = out.pooled_riemann_second_moment / out.pooled_trapezoid_second_moment;
  out.predicted_ratio = 1.0 + 3.0 * mean_of(jump_sq) / mean_of(grad_int);
  return out;
}

EfficiencyResult efficiency_experiment(const ExperimentConfig& config) {
  config.validate();
  const TestFunction f = resolve_function(config);
  if (!f.supports_gradient()) {
    throw CapabilityError("the efficiency study needs a function with a gradient; " + f.id() +
                          " has none");
  }
  const std::size_t R = config.replications;
  const std::size_t S = config.inner_samples;
  const std::size_t d = config.process.dim;
  const std::size_t substeps = config.oracle_factor;
  const double T = config.process.horizon;

  EfficiencyResult out;
  out.inner_samples = S;
  for (std::size_t n : config.n_ladder) {
    const double dt = T / static_cast<double>(n);
    std::vector<double> riem_sq(R), trap_sq(R), bridge_sq(R), family_sq(R), grad(R);
    std::vector<char> violation(R, 0);
    parallel_for(R, config.threads, [&](std::size_t r) {
      const PathGrid skel = simulate_bm(config.process, n, config.seed, r);
      std::vector<double> fx;
      eval_path(skel, f, fx);
      const double riemann = riemann_from_values(fx, 1, n, dt);
      const double trap = trapezoid_from_values(fx, 1, n, dt);
      std::vector<double> gamma(S), gsq, g(d);
      double gacc = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const PathGrid fill = bridge_fill_path(config.process, skel, substeps, config.seed, r,
                                               static_cast<std::uint32_t>(s));
        eval_path(fill, f, fx);
        const double h = fill.spacing();
        gamma[s] = trapezoid_from_values(fx, 1, fill.intervals(), h);
        gsq.resize(fill.size());
        for (std::size_t i = 0; i < fill.size(); ++i) {
          f.gradient(fill.point(i), g);
          double acc = 0.0;
          for (double v : g) acc += v * v;
          gsq[i] = acc;
        }
        gacc += trapezoid_from_values(gsq, 1, fill.intervals(), h) / 12.0;
      }
      const double fam_mean = mean_of(gamma);
      double a = 0.0, b = 0.0, c = 0.0;
      for (double v : gamma) {
        a += (riemann - v) * (riemann - v);
        b += (trap - v) * (trap - v);
        c += (fam_mean - v) * (fam_mean - v);
      }
      const double sd = static_cast<double>(S);
      riem_sq[r] = a / sd;
      trap_sq[r] = b / sd;
      family_sq[r] = c / sd;
      bridge_sq[r] = c / (sd - 1.0);
      grad[r] = gacc / sd;
      if (a < c || b < c) violation[r] = 1;
    });
    EfficiencyPoint p;
    p.n = n;
    p.dt = dt;
    std::tie(p.riemann_error, p.riemann_stderr) = root_mean_square(riem_sq);
    std::tie(p.trapezoid_error, p.trapezoid_stderr) = root_mean_square(trap_sq);
    std::tie(p.bridge_error, p.bridge_stderr) = root_mean_square(bridge_sq);
    p.bridge_family_error = root_mean_square(family_sq).first;
    const Moments mg = moments(grad);
    p.predicted_floor = dt * std::sqrt(mg.mean);
    p.floor_stderr = mg.mean > 0.0 ? dt * mg.standard_error() / (2.0 * std::sqrt(mg.mean)) : 0.0;
    p.family_violations =
        static_cast<std::size_t>(std::count(violation.begin(), violation.end(), 1));
    out.points.push_back(p);
  }
  return out;
}

LocalTimeResult local_time_experiment(const ExperimentConfig& config, bool abort_on_gate) {
  config.validate();
  require_oracle_resolution(config);
  const double H = hurst_of(config.process);
  const std::size_t n_fine = config.resolved_n_fine();
  const std::size_t R = config.replications;
  const std::size_t L = config.n_ladder.size();
  const double T = config.process.horizon;
  const double dt_fine = T / static_cast<double>(n_fine);

  LocalTimeResult out;
  out.hurst = H;
  out.rho = config.rho;
  out.exponent = local_time_exponent(H, config.rho);
  out.oracle_bandwidth = std::pow(dt_fine, out.exponent);
  RateOptions opts = config.rate_options;
  opts.rho = config.rho;
  out.prediction = theoretical_rate(config.process, 0.0, ErrorContext::LocalTime, opts);

  std::vector<double> levels{config.level};
  levels.insert(levels.end(), config.extra_levels.begin(), config.extra_levels.end());
  const std::size_t A = levels.size();
  std::vector<double> bw(L);
  for (std::size_t j = 0; j < L; ++j) {
    bw[j] = std::pow(T / static_cast<double>(config.n_ladder[j]), out.exponent);
  }
  const double eps0 = out.oracle_bandwidth;

  // Per replicate and level: L errors vs the eps0 oracle, L vs the eps0/2
  // oracle, and the oracle change.
  const std::size_t width = 2 * L + 1;
  std::vector<double> rec(R * A * width);
  for_each_path(config.process, n_fine, config.seed, R, config.threads,
                [&](std::uint64_t r, const PathGrid& path) {
                  const auto& x = path.values();
                  for (std::size_t a = 0; a < A; ++a) {
                    const double lvl = levels[a];
                    // Trapezoid weights: halves at both ends.
                    double full = 0.0, half = 0.0;
                    for (std::size_t i = 0; i <= n_fine; ++i) {
                      const double w = (i == 0 || i == n_fine) ? 0.5 : 1.0;
                      const double dist = std::abs(x[i] - lvl);
                      if (dist < eps0) full += w;
                      if (dist < 0.5 * eps0) half += w;
                    }
                    const double o = full * dt_fine / (2.0 * eps0);
                    const double oh = half * dt_fine / eps0;
                    double* slot = &rec[(r * A + a) * width];
                    for (std::size_t j = 0; j < L; ++j) {
                      const std::size_t n = config.n_ladder[j];
                      const std::size_t stride = n_fine / n;
                      std::size_t hits = 0;
                      for (std::size_t k = 0; k < n; ++k) {
                        if (std::abs(x[k * stride] - lvl) < bw[j]) ++hits;
                      }
                      const double est = static_cast<double>(hits) * (T / static_cast<double>(n)) /
                                         (2.0 * bw[j]);
                      slot[j] = est - o;
                      slot[L + j] = est - oh;
                    }
                    slot[2 * L] = oh - o;
                  }
                });

  std::vector<double> sq(R), sqh(R), sqd(R);
  for (std::size_t a = 0; a < A; ++a) {
    LocalTimeLevel lv;
    lv.level = levels[a];
    for (std::size_t r = 0; r < R; ++r) {
      const double dchg = rec[(r * A + a) * width + 2 * L];
      sqd[r] = dchg * dchg;
    }
    const double change = std::sqrt(mean_of(sqd));
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t r = 0; r < R; ++r) {
        const double* slot = &rec[(r * A + a) * width];
        sq[r] = slot[j] * slot[j];
        sqh[r] = slot[L + j] * slot[L + j];
      }
      LocalTimePoint p;
      p.n = config.n_ladder[j];
      p.dt = T / static_cast<double>(p.n);
      p.bandwidth = bw[j];
      std::tie(p.l2_error, p.standard_error) = root_mean_square(sq);
      p.l2_error_half_oracle = std::sqrt(mean_of(sqh));
      if (p.l2_error > 0.0) {
        p.oracle_sensitivity = std::abs(p.l2_error_half_oracle - p.l2_error) / p.l2_error;
        p.pathwise_oracle_change = change / p.l2_error;
      }
      out.max_sensitivity = std::max(out.max_sensitivity, p.oracle_sensitivity);
      lv.points.push_back(p);
    }
    std::vector<LadderPoint> rows;
    for (const auto& p : lv.points) rows.push_back({p.n, p.dt, p.l2_error, p.standard_error, 0.0});
    lv.fit = fit_rate(rows, config.drop_smallest);
    out.levels.push_back(std::move(lv));
  }
  out.gate_passed = out.max_sensitivity < 0.10;
  if (!out.gate_passed && abort_on_gate) {
    throw OracleError("local-time oracle is not stable under halving eps0: the L2 error moves by " +
                      num(100.0 * out.max_sensitivity) + "% (limit 10%)");
  }
  return out;
}

TScalingResult t_scaling_experiment(const ExperimentConfig& config) {
  config.validate();
  const TestFunction f = resolve_function(config);
  const std::optional<double> window = identity_window_of(config, f);
  const std::size_t R = config.replications;

  TScalingResult out;
  out.window = window.value_or(0.0);
  std::vector<double> x, y;
  for (double T : config.t_ladder) {
    ProcessSpec spec = config.process;
    spec.horizon = T;
    const std::size_t n = static_cast<std::size_t>(std::llround(T / config.fixed_dt));
    const std::size_t n_fine = n * config.oracle_factor;
    const double dt = T / static_cast<double>(n);
    const double dt_fine = T / static_cast<double>(n_fine);
    std::vector<double> sq(R);
    std::vector<char> overflow(R, 0);
    for_each_path(spec, n_fine, config.seed, R, config.threads,
                  [&](std::uint64_t r, const PathGrid& path) {
                    std::vector<double> fx;
                    eval_path(path, f, fx);
                    const double e = riemann_from_values(fx, config.oracle_factor, n, dt) -
                                     trapezoid_from_values(fx, 1, n_fine, dt_fine);
                    sq[r] = e * e;
                    if (window && path_sup(path) > *window) overflow[r] = 1;
                  });
    TScalingPoint p;
    p.horizon = T;
    p.n = n;
    std::tie(p.l2_error, p.standard_error) = root_mean_square(sq);
    p.overflow_fraction = static_cast<double>(std::count(overflow.begin(), overflow.end(), 1)) /
                          static_cast<double>(R);
    if (p.overflow_fraction > 0.01) out.overflow_flag = true;
    if (!(p.l2_error > 0.0)) throw FitError("nonpositive error at T = " + num(T));
    x.push_back(std::log(T));
    y.push_back(std::log(p.l2_error));
    out.points.push_back(p);
  }
  if (x.size() < 3) throw FitError("T fit needs at least 3 horizons");
  out.fit = to_rate_fit(least_squares(x, y));
  try {
    out.prediction = theoretical_rate(config.process, prediction_smoothness(config.process, f),
                                      ErrorContext::L2Error, config.rate_options);
  } catch (const CoverageError&) {
  }
  return out;
}

}  // namespace occlab
