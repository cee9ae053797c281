#include "occlab/theory.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "occlab/error.hpp"

namespace occlab {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

void require_range(double s, double lo, double hi, const std::string& model) {
  if (!(s >= lo && s <= hi)) {
    throw CoverageError("no rate for " + model + " with s = " + fmt(s) + ": needs " + fmt(lo) +
                        " <= s <= " + fmt(hi));
  }
}

bool symmetric_jumps(const JumpLaw& law) {
  if (const auto* g = std::get_if<GaussianJump>(&law)) return g->mean == 0.0;
  return std::holds_alternative<RademacherJump>(law);
}

RatePrediction local_time_rate(const ProcessSpec& model, double rho) {
  double hurst;
  if (model.kind() == ProcessKind::BrownianMotion) {
    hurst = 0.5;
  } else if (model.kind() == ProcessKind::FractionalBM) {
    hurst = std::get<FbmParams>(model.params).hurst;
  } else {
    throw CoverageError("local time rates are cataloged for Brownian and fractional Brownian "
                        "motion only, not " + std::string(to_string(model.kind())));
  }
  if (model.dim != 1) throw CoverageError("local time rates need d = 1");
  if (rho < 0.0) throw CoverageError("rho must be nonnegative");
  RatePrediction p;
  if (hurst >= 0.5) {
    p.delta_exponent = 0.75 * (1.0 - hurst) / (1.0 + hurst) - rho;
    p.T_exponent = hurst;
    p.source = "fBM local time, H >= 1/2: T^H dt^{(3/4)(1-H)/(1+H) - rho}";
  } else {
    p.delta_exponent = 0.5 * (1.0 - hurst) - rho;
    p.T_exponent = 0.5;
    p.source = "fBM local time, H < 1/2: T^{1/2} dt^{(1-H)/2 - rho}";
  }
  return p;
}

}  // namespace

RatePrediction theoretical_rate(const ProcessSpec& model, double s, ErrorContext context,
                                RateOptions options) {
  if (context == ErrorContext::LocalTime) return local_time_rate(model, options.rho);
  RatePrediction p;
  switch (model.kind()) {
    case ProcessKind::BrownianMotion:
      require_range(s, 0.0, 1.0, "Brownian motion");
      p.T_exponent = 0.5;
      if (options.sharp_indicator && s >= 0.5 - kSmoothnessSlack - 1e-12 && s <= 0.5) {
        p.delta_exponent = 0.75;
        p.source = "Brownian motion, indicator: sharp dt^{3/4} after interpolation";
      } else {
        p.delta_exponent = 0.5 * (1.0 + s);
        p.source = "Brownian motion (additive process with Gaussian part): T^{1/2} dt^{(1+s)/2}";
      }
      return p;
    case ProcessKind::ItoDiffusion:
      require_range(s, 0.0, 1.0, "Ito diffusion");
      p.delta_exponent = 0.5 * (1.0 + s);
      p.T_exponent = 0.5;
      p.log_factor = true;
      p.source = "Markov process under Gaussian heat kernel bounds: T^{1/2} dt^{(1+s)/2} (log n)^{1/2}";
      return p;
    case ProcessKind::FractionalBM: {
      const double h = std::get<FbmParams>(model.params).hurst;
      require_range(s, 0.0, 1.0, "fractional Brownian motion");
      if (h >= 0.5) {
        p.delta_exponent = 0.5 * (1.0 + s);
        p.T_exponent = h;
        p.source = "fBM, H >= 1/2: T^H dt^{(1+s)/2}";
      } else {
        p.delta_exponent = 0.5 * (1.0 + 2.0 * s * h);
        p.T_exponent = 0.5;
        p.source = "fBM, H < 1/2: T^{1/2} dt^{(1+2sH)/2}";
      }
      return p;
    }
    case ProcessKind::SymmetricStable: {
      const double g = std::get<StableParams>(model.params).stability;
      require_range(s, 0.0, 0.5 * g, "symmetric stable process");
      p.delta_exponent = 0.5 + s / g;
      p.T_exponent = 0.5;
      p.source = "symmetric gamma-stable process: T^{1/2} dt^{1/2 + s/gamma}";
      return p;
    }
    case ProcessKind::CompoundPoisson: {
      if (!(s >= 0.0)) throw CoverageError("compound Poisson rate needs f in L2 (s >= 0)");
      const auto& jumps = std::get<PoissonParams>(model.params).jumps;
      p.delta_exponent = 1.0;
      if (symmetric_jumps(jumps)) {
        p.T_exponent = 0.5;
        p.source = "compound Poisson, symmetric jump law: T^{1/2} dt for f in L2";
      } else {
        p.T_exponent = 1.0;
        p.source = "compound Poisson: T dt for f in L2";
      }
      return p;
    }
  }
  throw CoverageError("unknown model");
}

namespace {

struct Nodes {
  std::vector<double> x, w;
};

// Gauss-Legendre rule of order N mapped to [a, b].
template <int N>
void append_gauss(double a, double b, Nodes& out) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) {
      out.x.push_back(mid);
      out.w.push_back(half * ws[i]);
      continue;
    }
    out.x.push_back(mid - half * xs[i]);
    out.w.push_back(half * ws[i]);
    out.x.push_back(mid + half * xs[i]);
    out.w.push_back(half * ws[i]);
  }
}

Nodes frequency_nodes(double truncation, double panel_width) {
  Nodes nodes;
  const int panels = std::max(2, static_cast<int>(std::ceil(2.0 * truncation / panel_width)));
  const double w = 2.0 * truncation / panels;
  for (int p = 0; p < panels; ++p) {
    append_gauss<10>(-truncation + p * w, -truncation + (p + 1) * w, nodes);
  }
  return nodes;
}

Nodes unit_nodes(int order) {
  Nodes n;
  switch (order) {
    case 4: append_gauss<4>(0.0, 1.0, n); break;
    case 8: append_gauss<8>(0.0, 1.0, n); break;
    case 12: append_gauss<12>(0.0, 1.0, n); break;
    case 16: append_gauss<16>(0.0, 1.0, n); break;
    default: append_gauss<20>(0.0, 1.0, n); break;
  }
  return n;
}

// (1 - e^{-x}) / x, continuous at 0, any sign of x.
double e1(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - 0.5 * x + x * x / 6.0;
  return -std::expm1(-x) / x;
}

// Time functional in brackets for Brownian motion at one frequency pair.
// phi_{h,r} = exp(-(a h + b (r - h)) / 2) for h < r, with a = (u+v)^2,
// b = v^2; for h > r the roles give exp(-(a r + c (h - r)) / 2), c = u^2.
double brownian_time_term(double u, double v, std::size_t n, double dt) {
  const double a = (u + v) * (u + v);
  const double b = v * v;
  const double c = u * u;
  const double uv2 = 2.0 * u * v;

  // Local integral over one cell, cell start shifted to 0. Cell k carries
  // the extra factor e^{-a t_{k-1} / 2}; diag_weight sums those.
  auto local = [&](double r) {
    const double lower = 0.5 * b * std::exp(-0.5 * b * r) * r * e1(0.5 * (a - b) * r);
    const double upper = 0.5 * std::abs(b + uv2) * std::exp(-0.5 * a * r) * (dt - r) *
                         e1(0.5 * c * (dt - r));
    const double anchored = dt * 0.5 * b * std::exp(-0.5 * b * r);
    return lower + upper + anchored;
  };
  using boost::math::quadrature::gauss_kronrod;
  const double cell = gauss_kronrod<double, 21>::integrate(local, 0.0, dt, 10, 1e-10);

  const double qa = std::exp(-0.5 * a * dt);
  double diag_weight = 0.0, g = 1.0;
  for (std::size_t k = 0; k < n; ++k, g *= qa) diag_weight += g;

  // sum_{j=2}^{n-2} e^{-a t_{j-1}/2} sum_{m=2}^{n-j} q^m, q = e^{-b dt/2}.
  double off = 0.0;
  if (n >= 4) {
    const double q = std::exp(-0.5 * b * dt);
    // tail[M] = sum_{m=2}^{M} q^m, built up as M grows.
    std::vector<double> tail(n + 1, 0.0);
    double qm = q * q;
    for (std::size_t m = 2; m <= n; ++m, qm *= q) tail[m] = tail[m - 1] + qm;
    double ga = qa;  // e^{-a t_1 / 2}
    double sum = 0.0;
    for (std::size_t j = 2; j + 2 <= n; ++j, ga *= qa) sum += ga * tail[n - j];
    off = 0.25 * b * std::abs(a - b) * sum * dt * e1(0.5 * (a - b) * dt) * dt * e1(0.5 * b * dt);
  }
  return cell * diag_weight / dt + off;
}

struct GaussianPair {
  double hurst;
  double u, v;

  double cov(double h, double r) const {
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(h, e) + std::pow(r, e) - std::pow(std::abs(r - h), e));
  }
  double phi(double h, double r) const {
    const double e = 2.0 * hurst;
    return std::exp(-0.5 * (u * u * std::pow(h, e) + v * v * std::pow(r, e) + 2.0 * u * v * cov(h, r)));
  }
  static double sgn(double x) { return (x > 0.0) - (x < 0.0); }
  // 2H |x|^{2H-1} sgn(x), zero at x = 0 for H > 1/2.
  double dpow(double x) const {
    if (x == 0.0) return 0.0;
    return 2.0 * hurst * std::pow(std::abs(x), 2.0 * hurst - 1.0) * sgn(x);
  }
  double d_r(double h, double r) const {
    return v * v * dpow(r) + u * v * (dpow(r) - dpow(r - h));
  }
  double d_h(double h, double r) const {
    return u * u * dpow(h) + u * v * (dpow(h) - dpow(h - r));
  }
  double d_hr(double h, double r) const {
    return 2.0 * hurst * (2.0 * hurst - 1.0) * u * v * std::pow(std::abs(r - h), 2.0 * hurst - 2.0);
  }
  double abs_dr_phi(double h, double r) const { return 0.5 * std::abs(d_r(h, r)) * phi(h, r); }
  double abs_dhr_phi(double h, double r) const {
    return std::abs(-0.5 * d_hr(h, r) + 0.25 * d_r(h, r) * d_h(h, r)) * phi(h, r);
  }
};

double general_time_term(const GaussianPair& g, std::size_t n, double dt, const Nodes& t) {
  // Power map y = 1 - (1 - z)^p clusters nodes where |r - h| -> 0 and
  // removes the |r - h|^{2H-1} singularity from the integrand.
  const double p = std::max(1.0, std::ceil(1.0 / g.hurst));
  double diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    double cell = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      // Outer coordinate: distance from the cell start, mapped as z^p so the
      // r^{2H-1} factor near time 0 is tamed as well.
      const double xi = std::pow(t.x[i], p);
      const double jx = p * std::pow(t.x[i], p - 1.0) * t.w[i];
      const double s = dt * xi;  // position of the later time inside the cell
      for (std::size_t j = 0; j < t.x.size(); ++j) {
        const double y = 1.0 - std::pow(1.0 - t.x[j], p);
        const double jy = p * std::pow(1.0 - t.x[j], p - 1.0) * t.w[j];
        const double other = t0 + s * y;  // earlier time in [t0, t0 + s]
        const double later = t0 + s;
        const double weight = dt * jx * s * jy;
        // h < r triangle and its mirror h > r.
        cell += weight * (g.abs_dr_phi(other, later) + g.abs_dr_phi(later, other));
      }
      cell += dt * dt * jx * g.abs_dr_phi(t0, t0 + s);
    }
    diag += cell;
  }
  double off = 0.0;
  for (std::size_t kk = 4; kk <= n; ++kk) {
    for (std::size_t j = 2; j + 1 < kk; ++j) {
      const double r0 = static_cast<double>(kk - 1) * dt;
      const double h0 = static_cast<double>(j - 1) * dt;
      for (std::size_t a = 0; a < t.x.size(); ++a) {
        for (std::size_t b = 0; b < t.x.size(); ++b) {
          off += dt * dt * t.w[a] * t.w[b] *
                 g.abs_dhr_phi(h0 + dt * t.x[b], r0 + dt * t.x[a]);
        }
      }
    }
  }
  return diag / dt + off;
}

template <class TimeTerm>
double frequency_integral(const TestFunction& f, double dt, const FourierBoundOptions& opt,
                          TimeTerm&& time_term) {
  if (!f.has_fourier()) throw CapabilityError(f.id() + " has no analytic Fourier transform");
  if (!(opt.truncation > 0.0)) throw ParameterError("truncation must be positive");
  const Nodes nodes = frequency_nodes(opt.truncation, opt.panel_width);
  std::vector<double> mag(nodes.x.size());
  for (std::size_t i = 0; i < nodes.x.size(); ++i) mag[i] = std::abs(f.fourier_transform(nodes.x[i]));
  double total = 0.0, shell = 0.0;
  const double inner = 0.5 * opt.truncation;
  for (std::size_t i = 0; i < nodes.x.size(); ++i) {
    if (mag[i] == 0.0) continue;
    for (std::size_t j = 0; j < nodes.x.size(); ++j) {
      if (mag[j] == 0.0) continue;
      const double c = nodes.w[i] * nodes.w[j] * mag[i] * mag[j] * time_term(nodes.x[i], nodes.x[j]);
      total += c;
      if (std::max(std::abs(nodes.x[i]), std::abs(nodes.x[j])) > inner) shell += c;
    }
  }
  if (total > 0.0 && shell > 0.05 * total) {
    throw ResolutionError("frequency truncation " + fmt(opt.truncation) + " too small: outer shell holds " +
                          fmt(100.0 * shell / total) + "% of the bound");
  }
  return dt * dt * total;
}

void check_grid(std::size_t n, double horizon) {
  if (n < 1) throw ParameterError("n must be positive");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
}

}  // namespace

double fourier_bound_evaluator(const ProcessSpec& model, const TestFunction& f, std::size_t n,
                               double horizon, FourierBoundOptions options) {
  check_grid(n, horizon);
  if (model.dim != 1) throw ModelError("the Fourier bound is evaluated for d = 1 only");
  if (f.dim() != 1) throw CapabilityError("the Fourier bound needs a one-dimensional function");
  const double dt = horizon / static_cast<double>(n);
  switch (model.kind()) {
    case ProcessKind::BrownianMotion:
      return frequency_integral(f, dt, options, [&](double u, double v) {
        return brownian_time_term(u, v, n, dt);
      });
    case ProcessKind::FractionalBM:
      return fourier_bound_general(std::get<FbmParams>(model.params).hurst, f, n, horizon, options);
    default:
      throw ModelError("the Fourier bound is implemented for Brownian motion and fBM only");
  }
}

double fourier_bound_general(double hurst, const TestFunction& f, std::size_t n, double horizon,
                             FourierBoundOptions options) {
  check_grid(n, horizon);
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("Hurst index must lie in (0, 1)");
  const double dt = horizon / static_cast<double>(n);
  const Nodes t = unit_nodes(options.time_nodes);
  return frequency_integral(f, dt, options, [&](double u, double v) {
    return general_time_term(GaussianPair{hurst, u, v}, n, dt, t);
  });
}

}  // namespace occlab
