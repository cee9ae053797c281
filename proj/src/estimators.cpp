#include "occlab/estimators.hpp"

#include <cmath>

#include "occlab/error.hpp"

namespace occlab {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::Riemann: return "riemann";
    case EstimatorKind::Trapezoid: return "trapezoid";
    case EstimatorKind::Oracle: return "oracle";
    case EstimatorKind::BridgeConditional: return "bridge";
    case EstimatorKind::LocalTime: return "local_time";
  }
  return "unknown";
}

std::size_t steps_up_to(double t, double dt, double horizon, std::size_t intervals) {
  if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12)) {
    throw ParameterError("evaluation time must lie in [0, T]");
  }
  // The relative slack absorbs rounding in t = k * dt.
  const double k = std::floor(t / dt * (1.0 + 1e-12));
  return std::min(static_cast<std::size_t>(k), intervals);
}

namespace {

void require_skeleton(const PathGrid& skeleton) {
  if (skeleton.size() < 2) throw ParameterError("skeleton needs at least two points");
}

double f_at(const PathGrid& path, const TestFunction& f, std::size_t i) {
  return path.dim() == 1 ? f(path.value(i)) : f.eval(path.point(i));
}

}  // namespace

double riemann_sum(const PathGrid& skeleton, const TestFunction& f, double t) {
  require_skeleton(skeleton);
  const double dt = skeleton.spacing();
  const std::size_t m = steps_up_to(t, dt, skeleton.horizon(), skeleton.intervals());
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) sum += f_at(skeleton, f, k);
  return dt * sum;
}

double riemann_sum(const PathGrid& skeleton, const TestFunction& f) {
  return riemann_sum(skeleton, f, skeleton.horizon());
}

double trapezoid(const PathGrid& skeleton, const TestFunction& f, double t) {
  require_skeleton(skeleton);
  const double dt = skeleton.spacing();
  const std::size_t m = steps_up_to(t, dt, skeleton.horizon(), skeleton.intervals());
  if (m == 0) return 0.0;
  double sum = 0.5 * (f_at(skeleton, f, 0) + f_at(skeleton, f, m));
  for (std::size_t k = 1; k < m; ++k) sum += f_at(skeleton, f, k);
  return dt * sum;
}

double trapezoid(const PathGrid& skeleton, const TestFunction& f) {
  return trapezoid(skeleton, f, skeleton.horizon());
}

double occupation_oracle(const PathGrid& fine, const TestFunction& f, double t,
                         std::size_t required_intervals) {
  if (fine.intervals() < required_intervals) {
    throw OracleError("oracle path has " + std::to_string(fine.intervals()) +
                      " intervals, below the required " + std::to_string(required_intervals));
  }
  return trapezoid(fine, f, t);
}

double riemann_from_values(std::span<const double> fx, std::size_t stride, std::size_t count,
                           double dt) {
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) sum += fx[k * stride];
  return dt * sum;
}

double trapezoid_from_values(std::span<const double> fx, std::size_t stride, std::size_t count,
                             double dt) {
  if (count == 0) return 0.0;
  double sum = 0.5 * (fx[0] + fx[count * stride]);
  for (std::size_t k = 1; k < count; ++k) sum += fx[k * stride];
  return dt * sum;
}

double avar_hat(const PathGrid& skeleton, const TestFunction& f) {
  require_skeleton(skeleton);
  if (!f.supports_gradient()) {
    throw CapabilityError("AVAR estimate needs the gradient of " + f.id());
  }
  const std::size_t d = skeleton.dim();
  std::vector<double> g(d);
  double sum = 0.0;
  for (std::size_t k = 1; k < skeleton.size(); ++k) {
    double inner = 0.0;
    if (d == 1) {
      inner = f.derivative(skeleton.value(k - 1)) * (skeleton.value(k) - skeleton.value(k - 1));
    } else {
      f.gradient(skeleton.point(k - 1), g);
      for (std::size_t j = 0; j < d; ++j) {
        inner += g[j] * (skeleton.value(k, j) - skeleton.value(k - 1, j));
      }
    }
    sum += inner * inner;
  }
  return sum / 12.0;
}

std::optional<double> standardized_error(double oracle, double theta_hat, double avar,
                                         double dt) {
  if (!(avar > kAvarFloor)) return std::nullopt;
  return (oracle - theta_hat) / (dt * std::sqrt(avar));
}

namespace {

void require_bridge_inputs(const ProcessSpec& spec, const PathGrid& skeleton,
                           std::size_t substeps) {
  if (spec.kind() != ProcessKind::BrownianMotion) {
    throw ModelError("bridge conditional expectation is only valid for Brownian motion, not " +
                     std::string(to_string(spec.kind())));
  }
  if (substeps < 1) throw ParameterError("substeps must be at least 1");
  require_skeleton(skeleton);
  if (skeleton.dim() != spec.dim) throw ParameterError("skeleton dimension does not match spec");
}

}  // namespace

PathGrid bridge_fill_path(const ProcessSpec& spec, const PathGrid& skeleton,
                          std::size_t substeps, SeedPolicy seed, std::uint64_t replicate,
                          std::uint32_t sample) {
  require_bridge_inputs(spec, skeleton, substeps);
  const double dt = skeleton.spacing();
  const double h = dt / static_cast<double>(substeps);
  const std::size_t d = skeleton.dim();
  const std::size_t n = skeleton.intervals();
  std::vector<double> values((n * substeps + 1) * d);
  std::vector<double> x(d);
  CounterRng rng(seed, replicate, StreamTag::BridgeFill, sample);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = skeleton.value(k, j);
      values[k * substeps * d + j] = x[j];
    }
    // Sequential bridge: given B(jh) = x, B(jh + h) is normal with mean
    // x + (target - x) h / rem and variance h (rem - h) / rem.
    for (std::size_t i = 1; i < substeps; ++i) {
      const double rem = dt - static_cast<double>(i - 1) * h;
      const double frac = h / rem;
      const double sd = std::sqrt(h * (rem - h) / rem);
      for (std::size_t j = 0; j < d; ++j) {
        const double target = skeleton.value(k + 1, j);
        x[j] += (target - x[j]) * frac + sd * rng.normal();
        values[(k * substeps + i) * d + j] = x[j];
      }
    }
  }
  for (std::size_t j = 0; j < d; ++j) values[n * substeps * d + j] = skeleton.value(n, j);
  return PathGrid::equispaced(skeleton.horizon(), n * substeps, std::move(values), d);
}

std::vector<double> bridge_fill_samples(const ProcessSpec& spec, const PathGrid& skeleton,
                                        const TestFunction& f, std::size_t inner_samples,
                                        std::size_t substeps, SeedPolicy seed,
                                        std::uint64_t replicate) {
  if (inner_samples < 1) throw ParameterError("inner_samples must be at least 1");
  require_bridge_inputs(spec, skeleton, substeps);
  std::vector<double> out(inner_samples);
  std::vector<double> fx;
  for (std::size_t s = 0; s < inner_samples; ++s) {
    const PathGrid fill = bridge_fill_path(spec, skeleton, substeps, seed, replicate,
                                           static_cast<std::uint32_t>(s));
    fx.resize(fill.size());
    for (std::size_t i = 0; i < fill.size(); ++i) fx[i] = f.eval(fill.point(i));
    out[s] = trapezoid_from_values(fx, 1, fill.intervals(), fill.spacing());
  }
  return out;
}

BridgeEstimate bridge_conditional_expectation(const ProcessSpec& spec, const PathGrid& skeleton,
                                              const TestFunction& f, std::size_t inner_samples,
                                              SeedPolicy seed, std::uint64_t replicate,
                                              std::size_t substeps) {
  const auto g = bridge_fill_samples(spec, skeleton, f, inner_samples, substeps, seed, replicate);
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(g.size());
  double ss = 0.0;
  for (double v : g) ss += (v - mean) * (v - mean);
  BridgeEstimate out{mean, 0.0};
  if (g.size() > 1) {
    out.standard_error = std::sqrt(ss / static_cast<double>(g.size() - 1) /
                                   static_cast<double>(g.size()));
  }
  return out;
}

double local_time_exponent(double hurst, double rho) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("Hurst index must lie in (0, 1)");
  const double base = hurst >= 0.5 ? 1.5 * hurst / (1.0 + hurst) : hurst;
  const double alpha = base - rho;
  if (!(rho > 0.0) || !(rho < alpha)) {
    throw ParameterError("rho must lie in (0, alpha_H); got rho = " + std::to_string(rho) +
                         ", alpha_H = " + std::to_string(alpha));
  }
  return alpha;
}

double local_time_bandwidth(double dt, double hurst, double rho) {
  return std::pow(dt, local_time_exponent(hurst, rho));
}

double local_time_estimator(const PathGrid& skeleton, double level, double hurst, double rho) {
  if (skeleton.dim() != 1) throw ParameterError("local time estimator needs a scalar path");
  require_skeleton(skeleton);
  const double eps = local_time_bandwidth(skeleton.spacing(), hurst, rho);
  return riemann_sum(skeleton, make_local_time_kernel(level, eps));
}

}  // namespace occlab
