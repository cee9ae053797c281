#pragma once

#include <cstddef>
#include <string>

#include "occlab/process.hpp"
#include "occlab/test_function.hpp"

namespace occlab {

enum class ErrorContext { L2Error, LocalTime };

struct RatePrediction {
  double delta_exponent = 0.0;
  double T_exponent = 0.5;
  bool log_factor = false;
  std::string source;
};

struct RateOptions {
  /// Use the exact 3/4 exponent for indicators under Brownian motion
  /// instead of (1 + s)/2 with s = 1/2 - delta.
  bool sharp_indicator = false;
  /// Slack subtracted in the local-time exponent.
  double rho = 0.0;
};

/// Predicted L2-error exponents. Coverage error if (model, s) lies outside
/// the range where the rate is established (0 <= s <= 1, or s <= gamma/2
/// for stable processes with gamma < 2).
RatePrediction theoretical_rate(const ProcessSpec& model, double s,
                                ErrorContext context = ErrorContext::L2Error,
                                RateOptions options = {});

struct FourierBoundOptions {
  /// Frequency box [-truncation, truncation]^2.
  double truncation = 12.0;
  /// Gauss-Legendre panels per unit length and nodes per panel.
  double panel_width = 0.5;
  /// Time quadrature order for fractional Brownian motion.
  int time_nodes = 8;
};

/// C = 1 value of the characteristic-function upper bound on the squared
/// L2 error of the Riemann sum, for Brownian motion or fBM in d = 1 started
/// at 0:
///
///   dt^2 int int |Ff(u)| |Ff(v)| [ dt^{-1} sum_k int int_{cell_k^2}
///       (|d_r phi_{h,r}| + |d_r phi_{t_{k-1},r}|) dh dr
///     + sum_{k-1 > j >= 2} int_{cell_k} int_{cell_j} |d_hr phi_{h,r}| dh dr ] du dv
///
/// with phi_{h,r} the characteristic function of (X_h, X_r). Resolution
/// error when the outer half of the frequency box carries more than 5% of
/// the value.
double fourier_bound_evaluator(const ProcessSpec& model, const TestFunction& f, std::size_t n,
                               double horizon, FourierBoundOptions options = {});

/// Same value by direct quadrature of the general Gaussian formulas, without
/// the closed-form shortcuts used for H = 1/2. Slow; meant for checks.
double fourier_bound_general(double hurst, const TestFunction& f, std::size_t n, double horizon,
                             FourierBoundOptions options = {});

}  // namespace occlab
