#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "occlab/rng.hpp"

namespace occlab {

enum class ProcessKind {
  BrownianMotion,
  ItoDiffusion,
  FractionalBM,
  SymmetricStable,
  CompoundPoisson,
};

std::string_view to_string(ProcessKind kind) noexcept;

struct BrownianParams {};

/// b(x) into out[0..d), sigma(x) into out[0..d*d) row-major. Both must be
/// Lipschitz for the Euler scheme to converge; that is the caller's promise.
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

struct DiffusionParams {
  VectorField drift;
  VectorField diffusion;
  std::string name = "custom";
};

struct FbmParams {
  double hurst = 0.5;
};

struct StableParams {
  double stability = 2.0;  // gamma in (0, 2]
  double scale = 0.5;      // c in psi(v) = -c |v|^gamma
};

struct PointMassJump {
  double size = 1.0;
};
struct GaussianJump {
  double mean = 0.0;
  double stddev = 1.0;
};
/// +-size with probability 1/2 each.
struct RademacherJump {
  double size = 1.0;
};
using JumpLaw = std::variant<PointMassJump, GaussianJump, RademacherJump>;

struct PoissonParams {
  double rate = 1.0;
  JumpLaw jumps = GaussianJump{};
};

using ProcessParams = std::variant<BrownianParams, DiffusionParams, FbmParams,
                                   StableParams, PoissonParams>;

struct PointLaw {
  std::vector<double> x0;
};
struct GaussianLaw {
  std::vector<double> mean;
  std::vector<double> covariance;  // d*d row-major
};
struct SamplerLaw {
  std::function<std::vector<double>(CounterRng&)> sample;
};
using InitialLaw = std::variant<PointLaw, GaussianLaw, SamplerLaw>;

struct ProcessSpec {
  std::size_t dim = 1;
  double horizon = 1.0;
  ProcessParams params = BrownianParams{};
  /// Empty point law means the origin.
  InitialLaw initial_law = PointLaw{};

  ProcessKind kind() const noexcept;
  /// Parameter error if the record violates the kind's constraints.
  void validate() const;

  static ProcessSpec brownian(std::size_t dim = 1, double horizon = 1.0);
  static ProcessSpec diffusion(DiffusionParams params, std::size_t dim = 1,
                               double horizon = 1.0);
  static ProcessSpec fbm(double hurst, double horizon = 1.0);
  static ProcessSpec stable(double stability, double scale, double horizon = 1.0);
  static ProcessSpec compound_poisson(double rate, JumpLaw jumps, std::size_t dim = 1,
                                      double horizon = 1.0);
};

/// Hurst index of the Gaussian models: 1/2 for Brownian motion and
/// diffusions, H for fBM. Model error for the jump processes.
double hurst_of(const ProcessSpec& spec);

/// Scalar diffusions addressable by name in configs.
DiffusionParams ornstein_uhlenbeck(double theta = 1.0, double sigma = 1.0,
                                   double mean = 0.0);
DiffusionParams constant_coefficients(double drift = 0.0, double sigma = 1.0);
/// b = 0, sigma(x) = 1 + amplitude * sin(x).
DiffusionParams sine_volatility(double amplitude = 0.5);
DiffusionParams scalar_diffusion(std::function<double(double)> drift,
                                 std::function<double(double)> sigma,
                                 std::string name = "custom");

}  // namespace occlab
