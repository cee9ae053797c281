#include "occlab/sobolev.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "occlab/error.hpp"

namespace occlab {

namespace {

// 2 * integral over [lo, hi] of g, g even in u; unit panels so that the
// oscillation of |Ff| never spans many periods inside one panel.
template <class G>
double symmetric_mass(const G& g, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (double a = lo; a < hi; a += 1.0) {
    const double b = std::min(a + 1.0, hi);
    total += gauss_kronrod<double, 15>::integrate(g, a, b, 6, 1e-10);
  }
  return 2.0 * total;
}

}  // namespace

NormResult sobolev_norm(const TestFunction& f, double s, double p, double truncation) {
  if (!(p >= 1.0)) throw ParameterError("p must be at least 1");
  if (!(truncation > 0.0) || !std::isfinite(truncation)) {
    throw ParameterError("truncation radius must be positive");
  }
  if (f.dim() != 1) throw CapabilityError("Sobolev norms are computed for d = 1 only");
  if (!f.has_fourier()) throw CapabilityError(f.id() + " has no Fourier transform");

  auto g = [&](double u) {
    return std::pow(std::abs(f.fourier_transform(u)), p) * std::pow(1.0 + std::abs(u), s * p);
  };
  const double r = truncation;
  const double i1 = symmetric_mass(g, 0.0, r);
  const double m1 = symmetric_mass(g, r, 2.0 * r);
  const double m2 = symmetric_mass(g, 2.0 * r, 4.0 * r);
  const double v1 = std::pow(i1, 1.0 / p);
  const double v2 = std::pow(i1 + m1, 1.0 / p);
  const double v4 = std::pow(i1 + m1 + m2, 1.0 / p);

  const double growth1 = v1 > 0.0 ? v2 / v1 - 1.0 : 0.0;
  const double growth2 = v2 > 0.0 ? v4 / v2 - 1.0 : 0.0;
  if (growth1 > 0.05 && growth2 > 0.05) return DivergenceSignal{r, growth1, growth2};

  NormEstimate out;
  out.value = v1;
  out.truncation_radius = r;
  // Geometric extrapolation of the dyadic shell masses.
  double tail_mass;
  if (m1 <= 0.0) {
    tail_mass = 0.0;
  } else if (m2 < m1) {
    tail_mass = m1 * m1 / (m1 - m2);
  } else {
    tail_mass = std::numeric_limits<double>::infinity();
  }
  out.tail_estimate = std::pow(i1 + tail_mass, 1.0 / p) - v1;
  out.quadrature_error_flag = !(out.tail_estimate <= 0.01 * v1);
  return out;
}

double plancherel_l2_squared(const TestFunction& f, double truncation) {
  if (f.dim() != 1) throw CapabilityError("Plancherel check is one-dimensional");
  auto g = [&](double u) { return std::norm(f.fourier_transform(u)); };
  return symmetric_mass(g, 0.0, truncation) / (2.0 * std::numbers::pi);
}

}  // namespace occlab
