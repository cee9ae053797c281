#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace occlab {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error() const;
};

/// Two-pass mean and variance, summed in index order.
Moments moments(std::span<const double> x);

double normal_cdf(double z);

/// sup |F_n - Phi| for the standard normal.
double ks_distance_normal(std::vector<double> sample);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> x, double q);

/// Sample covariance of paired data.
double covariance(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace occlab
