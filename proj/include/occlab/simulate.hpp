#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "occlab/path_grid.hpp"
#include "occlab/process.hpp"
#include "occlab/rng.hpp"

namespace occlab {

// All simulators are pure functions of (spec, n_fine, seed, replicate) and
// return the process on the equispaced grid of n_fine + 1 points, started
// from a draw of spec.initial_law.

/// Exact Brownian motion via the Levy midpoint construction. Writing
/// n_fine = m * 2^k with m odd, the m coarse increments and every midpoint
/// draw are addressed by position, so paths with the same m and different k
/// agree at all shared nodes.
PathGrid simulate_bm(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                     std::uint64_t replicate);

/// Brownian motion started at 0, before the initial law is applied.
PathGrid brownian_from_origin(std::size_t dim, double horizon, std::size_t n_fine,
                              SeedPolicy seed, std::uint64_t replicate);

/// Euler-Maruyama on the fine grid, driven by the Brownian path of
/// simulate_bm, so dyadic refinements of n_fine are coupled.
PathGrid simulate_diffusion(const ProcessSpec& spec, std::size_t n_fine,
                            SeedPolicy seed, std::uint64_t replicate);

enum class FbmMethod { Auto, Circulant, Cholesky };

/// Exact fBM by circulant embedding of fractional Gaussian noise, with a
/// dense Cholesky fallback when the embedding has negative eigenvalues.
/// One embedding draw yields two independent paths; replicates 2i and
/// 2i + 1 are those two paths, so simulate_fbm_pair(i) returns both at the
/// cost of one.
PathGrid simulate_fbm(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                      std::uint64_t replicate, FbmMethod method = FbmMethod::Auto);
std::pair<PathGrid, PathGrid> simulate_fbm_pair(const ProcessSpec& spec, std::size_t n_fine,
                                                SeedPolicy seed, std::uint64_t pair_index,
                                                FbmMethod method = FbmMethod::Auto);

/// Receives one line each time an fBM sampler is set up for a new (H, n),
/// naming the method and any fallback. Silent by default.
void set_fbm_decision_log(std::function<void(const std::string&)> sink);

/// Largest n for which the dense Cholesky fallback is attempted.
inline constexpr std::size_t kCholeskyLimit = 2048;

/// Which sampler simulate_fbm(Auto) uses for (H, n). Triggers the
/// eigenvalue computation if it is not cached yet.
FbmMethod fbm_method_for(double hurst, std::size_t n);

/// Chambers-Mallows-Stuck increments with scale (c * dt)^(1/gamma).
PathGrid simulate_stable(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                         std::uint64_t replicate);

struct JumpRecord {
  std::vector<double> times;
  std::vector<double> sizes;  // times.size() x dim, row-major
};

/// Jump times and sizes of a compound Poisson process on [0, horizon].
/// Independent of any grid, which is what couples different resolutions.
JumpRecord sample_compound_poisson_jumps(const ProcessSpec& spec, SeedPolicy seed,
                                         std::uint64_t replicate);

PathGrid simulate_compound_poisson(const ProcessSpec& spec, std::size_t n_fine,
                                   SeedPolicy seed, std::uint64_t replicate);

/// Dispatches on spec.kind().
PathGrid simulate(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                  std::uint64_t replicate);

/// One draw from the initial law, from its own stream.
std::vector<double> sample_initial(const InitialLaw& law, std::size_t dim,
                                   SeedPolicy seed, std::uint64_t replicate);

/// Adds one independent initial draw to every value of a path that starts
/// at the origin.
PathGrid randomize_initial(const PathGrid& path, const InitialLaw& law,
                           SeedPolicy seed, std::uint64_t replicate);

/// The n + 1 skeleton points t_k = kT/n, copied from an equispaced path.
/// Alignment error if n does not divide the number of fine intervals.
PathGrid subsample(const PathGrid& path, std::size_t n);

}  // namespace occlab
