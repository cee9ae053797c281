#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occlab/path_grid.hpp"
#include "occlab/process.hpp"
#include "occlab/rng.hpp"
#include "occlab/test_function.hpp"

namespace occlab {

enum class EstimatorKind { Riemann, Trapezoid, Oracle, BridgeConditional, LocalTime };

std::string_view to_string(EstimatorKind kind) noexcept;

struct EstimateRecord {
  EstimatorKind kind = EstimatorKind::Riemann;
  double value = 0.0;
  std::size_t n = 0;
  double t = 0.0;
  std::string function_id;
};

/// Number of whole grid steps of size dt in [0, t]; t is snapped down to the
/// grid. Parameter error if t lies outside [0, horizon].
std::size_t steps_up_to(double t, double dt, double horizon, std::size_t intervals);

/// dt * sum_{k=1}^{floor(t/dt)} f(X_{t_{k-1}}).
double riemann_sum(const PathGrid& skeleton, const TestFunction& f, double t);
double riemann_sum(const PathGrid& skeleton, const TestFunction& f);

/// dt * sum_{k=1}^{floor(t/dt)} (f(X_{t_{k-1}}) + f(X_{t_k})) / 2.
double trapezoid(const PathGrid& skeleton, const TestFunction& f, double t);
double trapezoid(const PathGrid& skeleton, const TestFunction& f);

/// Composite trapezoid quadrature of r -> f(X_r) on the fine grid, the
/// stand-in for the occupation functional. Oracle error if the path has
/// fewer than `required_intervals` intervals.
double occupation_oracle(const PathGrid& fine, const TestFunction& f, double t,
                         std::size_t required_intervals = 0);

// The same sums on precomputed values f(X_{i*stride}), i = 0..count.
double riemann_from_values(std::span<const double> fx, std::size_t stride, std::size_t count,
                           double dt);
double trapezoid_from_values(std::span<const double> fx, std::size_t stride, std::size_t count,
                             double dt);

/// (1/12) sum_k <grad f(X_{t_{k-1}}), X_{t_k} - X_{t_{k-1}}>^2.
double avar_hat(const PathGrid& skeleton, const TestFunction& f);

inline constexpr double kAvarFloor = 1e-12;

/// (oracle - theta_hat) / (dt * sqrt(avar_hat)); empty when avar_hat is at
/// or below the floor, so the caller can exclude and count the record.
std::optional<double> standardized_error(double oracle, double theta_hat, double avar_hat,
                                         double dt);

/// Brownian-bridge fill-ins of a Brownian skeleton: each sample draws the
/// path at `substeps` equal sub-steps inside every interval, pinned at the
/// skeleton values, and integrates f along it by the trapezoid rule. Every
/// sample is an exact draw of the fine path given the skeleton.
std::vector<double> bridge_fill_samples(const ProcessSpec& spec, const PathGrid& skeleton,
                                        const TestFunction& f, std::size_t inner_samples,
                                        std::size_t substeps, SeedPolicy seed,
                                        std::uint64_t replicate);

/// Fill-in number `sample` of bridge_fill_samples: the path on the grid of
/// n * substeps intervals, equal to the skeleton at its nodes.
PathGrid bridge_fill_path(const ProcessSpec& spec, const PathGrid& skeleton,
                          std::size_t substeps, SeedPolicy seed, std::uint64_t replicate,
                          std::uint32_t sample);

struct BridgeEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of E[integral of f(X_r) dr | skeleton] for Brownian
/// motion. Model error for any other process.
BridgeEstimate bridge_conditional_expectation(const ProcessSpec& spec, const PathGrid& skeleton,
                                              const TestFunction& f, std::size_t inner_samples,
                                              SeedPolicy seed, std::uint64_t replicate = 0,
                                              std::size_t substeps = 64);

/// alpha_H = 1.5 H / (1 + H) - rho for H >= 1/2 and H - rho below.
/// Parameter error unless 0 < rho < alpha_H.
double local_time_exponent(double hurst, double rho);

/// Kernel half width dt^{alpha_H} used at spacing dt.
double local_time_bandwidth(double dt, double hurst, double rho);

/// Riemann sum of the kernel (2 eps)^{-1} 1_{(a - eps, a + eps)} with
/// eps = dt^{alpha_H}.
double local_time_estimator(const PathGrid& skeleton, double level, double hurst, double rho);

}  // namespace occlab
