#include "occlab/process.hpp"

#include <cmath>

#include "occlab/error.hpp"

namespace occlab {

std::string_view to_string(ProcessKind kind) noexcept {
  switch (kind) {
    case ProcessKind::BrownianMotion: return "bm";
    case ProcessKind::ItoDiffusion: return "diffusion";
    case ProcessKind::FractionalBM: return "fbm";
    case ProcessKind::SymmetricStable: return "stable";
    case ProcessKind::CompoundPoisson: return "poisson";
  }
  return "unknown";
}

ProcessKind ProcessSpec::kind() const noexcept {
  return static_cast<ProcessKind>(params.index());
}

void ProcessSpec::validate() const {
  if (dim == 0) throw ParameterError("dim must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("horizon must be positive and finite");
  }
  switch (kind()) {
    case ProcessKind::BrownianMotion:
      break;
    case ProcessKind::ItoDiffusion: {
      const auto& p = std::get<DiffusionParams>(params);
      if (!p.drift || !p.diffusion) {
        throw ParameterError("diffusion needs drift and diffusion coefficients");
      }
      break;
    }
    case ProcessKind::FractionalBM: {
      const double h = std::get<FbmParams>(params).hurst;
      if (dim != 1) throw ParameterError("fractional Brownian motion requires dim == 1");
      if (!(h > 0.0 && h < 1.0)) throw ParameterError("Hurst index must lie in (0, 1)");
      break;
    }
    case ProcessKind::SymmetricStable: {
      const auto& p = std::get<StableParams>(params);
      if (dim != 1) throw ParameterError("stable process requires dim == 1");
      if (!(p.stability > 0.0 && p.stability <= 2.0)) {
        throw ParameterError("stability index must lie in (0, 2]");
      }
      if (!(p.scale > 0.0)) throw ParameterError("stable scale must be positive");
      break;
    }
    case ProcessKind::CompoundPoisson: {
      const auto& p = std::get<PoissonParams>(params);
      if (!(p.rate > 0.0) || !std::isfinite(p.rate)) {
        throw ParameterError("jump rate must be positive");
      }
      if (const auto* g = std::get_if<GaussianJump>(&p.jumps); g && !(g->stddev >= 0.0)) {
        throw ParameterError("Gaussian jump stddev must be nonnegative");
      }
      break;
    }
  }
  if (const auto* pt = std::get_if<PointLaw>(&initial_law)) {
    if (!pt->x0.empty() && pt->x0.size() != dim) {
      throw ParameterError("initial point has wrong dimension");
    }
  } else if (const auto* g = std::get_if<GaussianLaw>(&initial_law)) {
    if (g->mean.size() != dim || g->covariance.size() != dim * dim) {
      throw ParameterError("Gaussian initial law has wrong dimension");
    }
  } else if (!std::get<SamplerLaw>(initial_law).sample) {
    throw ParameterError("sampler initial law has no sampler");
  }
}

ProcessSpec ProcessSpec::brownian(std::size_t dim, double horizon) {
  ProcessSpec s;
  s.dim = dim;
  s.horizon = horizon;
  s.params = BrownianParams{};
  return s;
}

ProcessSpec ProcessSpec::diffusion(DiffusionParams params, std::size_t dim,
                                   double horizon) {
  ProcessSpec s;
  s.dim = dim;
  s.horizon = horizon;
  s.params = std::move(params);
  return s;
}

ProcessSpec ProcessSpec::fbm(double hurst, double horizon) {
  ProcessSpec s;
  s.horizon = horizon;
  s.params = FbmParams{hurst};
  return s;
}

ProcessSpec ProcessSpec::stable(double stability, double scale, double horizon) {
  ProcessSpec s;
  s.horizon = horizon;
  s.params = StableParams{stability, scale};
  return s;
}

ProcessSpec ProcessSpec::compound_poisson(double rate, JumpLaw jumps, std::size_t dim,
                                          double horizon) {
  ProcessSpec s;
  s.dim = dim;
  s.horizon = horizon;
  s.params = PoissonParams{rate, jumps};
  return s;
}

double hurst_of(const ProcessSpec& spec) {
  switch (spec.kind()) {
    case ProcessKind::BrownianMotion:
    case ProcessKind::ItoDiffusion:
      return 0.5;
    case ProcessKind::FractionalBM:
      return std::get<FbmParams>(spec.params).hurst;
    default:
      throw ModelError("no Hurst index for " + std::string(to_string(spec.kind())));
  }
}

DiffusionParams scalar_diffusion(std::function<double(double)> drift,
                                 std::function<double(double)> sigma,
                                 std::string name) {
  DiffusionParams p;
  p.drift = [drift](std::span<const double> x, std::span<double> out) {
    out[0] = drift(x[0]);
  };
  p.diffusion = [sigma](std::span<const double> x, std::span<double> out) {
    out[0] = sigma(x[0]);
  };
  p.name = std::move(name);
  return p;
}

DiffusionParams ornstein_uhlenbeck(double theta, double sigma, double mean) {
  return scalar_diffusion([theta, mean](double x) { return -theta * (x - mean); },
                          [sigma](double) { return sigma; }, "ou");
}

DiffusionParams constant_coefficients(double drift, double sigma) {
  return scalar_diffusion([drift](double) { return drift; },
                          [sigma](double) { return sigma; }, "constant");
}

DiffusionParams sine_volatility(double amplitude) {
  return scalar_diffusion([](double) { return 0.0; },
                          [amplitude](double x) { return 1.0 + amplitude * std::sin(x); },
                          "sine_vol");
}

}  // namespace occlab
