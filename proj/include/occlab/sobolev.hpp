#pragma once

#include <variant>

#include "occlab/test_function.hpp"

namespace occlab {

struct NormEstimate {
  double value = 0.0;
  double truncation_radius = 0.0;
  /// Set when the extrapolated tail beyond the radius exceeds 1% of value.
  bool quadrature_error_flag = false;
  double tail_estimate = 0.0;
};

/// The integral was still growing by more than 5% per doubling of the
/// radius, twice in a row. The growth ratios are kept for diagnostics.
struct DivergenceSignal {
  double truncation_radius = 0.0;
  double growth_first = 0.0;
  double growth_second = 0.0;
};

using NormResult = std::variant<NormEstimate, DivergenceSignal>;

inline bool is_divergent(const NormResult& r) {
  return std::holds_alternative<DivergenceSignal>(r);
}

inline constexpr double kDefaultTruncation = 1e4;

/// (integral over |u| <= truncation of |Ff(u)|^p (1 + |u|)^{sp} du)^{1/p},
/// by adaptive Gauss-Kronrod on unit panels. The radius is doubled twice to
/// detect divergence and to extrapolate the tail.
NormResult sobolev_norm(const TestFunction& f, double s, double p = 2.0,
                        double truncation = kDefaultTruncation);

/// (2 pi)^{-1} times the integral of |Ff|^2 over |u| <= truncation.
double plancherel_l2_squared(const TestFunction& f, double truncation = kDefaultTruncation);

}  // namespace occlab
