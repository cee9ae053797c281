#include "occlab/simulate.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "occlab/error.hpp"
#include "occlab/fft.hpp"

namespace occlab {

namespace {

void require_kind(const ProcessSpec& spec, ProcessKind kind) {
  if (spec.kind() != kind) {
    throw ParameterError("expected a " + std::string(to_string(kind)) +
                         " spec, got " + std::string(to_string(spec.kind())));
  }
  spec.validate();
}

void require_n(std::size_t n_fine) {
  if (n_fine < 2) throw ParameterError("n_fine must be at least 2");
}

double pick(const std::pair<double, double>& pair, std::uint64_t index) {
  return (index & 1) ? pair.second : pair.first;
}

// Brownian path of one coordinate, written with stride `dim` into `out`.
void levy_coordinate(double horizon, std::size_t n_fine, SeedPolicy seed,
                     std::uint64_t replicate, std::size_t coord, std::size_t dim,
                     std::vector<double>& out) {
  std::size_t cells = n_fine;
  int levels = 0;
  while (cells % 2 == 0) {
    cells /= 2;
    ++levels;
  }
  const std::size_t per_cell = std::size_t{1} << levels;
  const double cell_len = horizon / static_cast<double>(cells);

  const CounterRng base(seed, replicate, StreamTag::BrownianBase,
                        static_cast<std::uint32_t>(coord));
  auto at = [&](std::size_t i) -> double& { return out[i * dim + coord]; };
  at(0) = 0.0;
  const double base_sd = std::sqrt(cell_len);
  for (std::size_t c = 0; c < cells; c += 2) {
    const auto z = base.normal_pair_at(c / 2);
    at((c + 1) * per_cell) = at(c * per_cell) + base_sd * z.first;
    if (c + 1 < cells) at((c + 2) * per_cell) = at((c + 1) * per_cell) + base_sd * z.second;
  }
  if (levels == 0) return;

  const std::uint64_t substreams = static_cast<std::uint64_t>(cells) * dim;
  if (substreams >> 32) throw ParameterError("too many base cells for the Brownian construction");
  for (std::size_t c = 0; c < cells; ++c) {
    const CounterRng bridge(seed, replicate, StreamTag::BrownianBridge,
                            static_cast<std::uint32_t>(c * dim + coord));
    const std::size_t origin = c * per_cell;
    double len = cell_len;
    for (int l = 1; l <= levels; ++l) {
      const std::size_t count = std::size_t{1} << (l - 1);  // midpoints at this level
      const std::size_t half = per_cell >> l;
      const double sd = 0.5 * std::sqrt(len);
      std::pair<double, double> z{};
      for (std::size_t p = 0; p < count; ++p) {
        const std::uint64_t heap = count + p;
        if (p == 0 || (heap & 1) == 0) z = bridge.normal_pair_at(heap / 2);
        const std::size_t mid = origin + (2 * p + 1) * half;
        at(mid) = 0.5 * (at(mid - half) + at(mid + half)) + sd * pick(z, heap);
      }
      len *= 0.5;
    }
  }
}

struct FbmFactor {
  FbmMethod method = FbmMethod::Circulant;
  std::vector<double> root;  // sqrt(lambda / M) for circulant, lower factor otherwise
  std::size_t n = 0;
};

double fgn_autocov(double hurst, double k) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(k + 1.0), h2) - 2.0 * std::pow(std::abs(k), h2) +
                std::pow(std::abs(k - 1.0), h2));
}

// Unit-spacing fGn; increments are scaled by dt^H afterwards.
std::shared_ptr<const FbmFactor> circulant_factor(double hurst, std::size_t n) {
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_autocov(hurst, static_cast<double>(j));
  for (std::size_t j = 1; j < n; ++j) row[m - j] = row[j];
  dft(row, -1);
  auto f = std::make_shared<FbmFactor>();
  f->n = n;
  f->root.resize(m);
  double largest = 0.0;
  for (const auto& v : row) largest = std::max(largest, std::abs(v.real()));
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = row[k].real();
    if (lambda < -1e-10 * largest) return nullptr;
    f->root[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
  }
  return f;
}

std::shared_ptr<const FbmFactor> cholesky_factor(double hurst, std::size_t n) {
  if (n > kCholeskyLimit) {
    throw NumericError("circulant embedding failed and n = " + std::to_string(n) +
                       " exceeds the dense Cholesky limit");
  }
  auto f = std::make_shared<FbmFactor>();
  f->method = FbmMethod::Cholesky;
  f->n = n;
  auto& a = f->root;
  a.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = fgn_autocov(hurst, static_cast<double>(i - j));
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(s > 0.0)) throw NumericError("fGn covariance is not positive definite");
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
  }
  return f;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(const std::string&)>& log_sink() {
  static std::function<void(const std::string&)> sink;
  return sink;
}

void log_decision(const std::string& line) {
  std::lock_guard lock(log_mutex());
  if (log_sink()) log_sink()(line);
}

std::string hurst_text(double hurst) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", hurst);
  return buf;
}

std::shared_ptr<const FbmFactor> fbm_factor(double hurst, std::size_t n, FbmMethod method) {
  static std::mutex mutex;
  static std::map<std::tuple<double, std::size_t, int>, std::shared_ptr<const FbmFactor>> cache;
  const int key = method == FbmMethod::Cholesky ? 1 : 0;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find({hurst, n, key}); it != cache.end()) return it->second;
  }
  std::shared_ptr<const FbmFactor> f;
  if (method != FbmMethod::Cholesky) {
    f = circulant_factor(hurst, n);
    if (!f && method == FbmMethod::Circulant) {
      throw NumericError("circulant embedding is not nonnegative definite");
    }
  }
  const std::string where = "H = " + hurst_text(hurst) + ", n = " + std::to_string(n);
  if (f) {
    log_decision("fbm sampler: circulant embedding (" + where + ")");
  } else {
    if (method != FbmMethod::Cholesky) {
      log_decision("fbm sampler: circulant embedding has negative eigenvalues (" + where +
                   "); falling back to dense Cholesky");
    }
    f = cholesky_factor(hurst, n);
    log_decision("fbm sampler: dense Cholesky (" + where + ")");
  }
  std::lock_guard lock(mutex);
  return cache.emplace(std::tuple{hurst, n, key}, f).first->second;
}

std::vector<double> lower_cholesky(const std::vector<double>& cov, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = cov[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        // Semidefinite directions get a zero column.
        l[i * d + i] = s > 0.0 ? std::sqrt(s) : 0.0;
        if (s < -1e-12 * std::max(1.0, std::abs(cov[i * d + i]))) {
          throw ParameterError("initial covariance is not positive semidefinite");
        }
      } else {
        l[i * d + j] = l[j * d + j] > 0.0 ? s / l[j * d + j] : 0.0;
      }
    }
  }
  return l;
}

}  // namespace

void set_fbm_decision_log(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(log_mutex());
  log_sink() = std::move(sink);
}

PathGrid brownian_from_origin(std::size_t dim, double horizon, std::size_t n_fine,
                              SeedPolicy seed, std::uint64_t replicate) {
  require_n(n_fine);
  if (dim == 0) throw ParameterError("dim must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("horizon must be positive and finite");
  }
  std::vector<double> values((n_fine + 1) * dim);
  for (std::size_t j = 0; j < dim; ++j) {
    levy_coordinate(horizon, n_fine, seed, replicate, j, dim, values);
  }
  return PathGrid::equispaced(horizon, n_fine, std::move(values), dim);
}

PathGrid simulate_bm(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                     std::uint64_t replicate) {
  require_kind(spec, ProcessKind::BrownianMotion);
  return randomize_initial(brownian_from_origin(spec.dim, spec.horizon, n_fine, seed, replicate),
                           spec.initial_law, seed, replicate);
}

PathGrid simulate_diffusion(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                            std::uint64_t replicate) {
  require_kind(spec, ProcessKind::ItoDiffusion);
  const auto& p = std::get<DiffusionParams>(spec.params);
  const std::size_t d = spec.dim;
  const PathGrid w = brownian_from_origin(d, spec.horizon, n_fine, seed, replicate);
  const double dt = spec.horizon / static_cast<double>(n_fine);

  std::vector<double> x((n_fine + 1) * d);
  const auto x0 = sample_initial(spec.initial_law, d, seed, replicate);
  std::copy(x0.begin(), x0.end(), x.begin());
  std::vector<double> b(d), sigma(d * d);
  const auto& wv = w.values();
  for (std::size_t i = 0; i < n_fine; ++i) {
    std::span<const double> xi(x.data() + i * d, d);
    p.drift(xi, b);
    p.diffusion(xi, sigma);
    for (std::size_t r = 0; r < d; ++r) {
      double next = xi[r] + b[r] * dt;
      for (std::size_t c = 0; c < d; ++c) {
        next += sigma[r * d + c] * (wv[(i + 1) * d + c] - wv[i * d + c]);
      }
      if (!std::isfinite(next)) {
        throw SimulationError("diffusion produced a non-finite value at time index " +
                              std::to_string(i + 1));
      }
      x[(i + 1) * d + r] = next;
    }
  }
  return PathGrid::equispaced(spec.horizon, n_fine, std::move(x), d);
}

FbmMethod fbm_method_for(double hurst, std::size_t n) {
  return fbm_factor(hurst, n, FbmMethod::Auto)->method;
}

std::pair<PathGrid, PathGrid> simulate_fbm_pair(const ProcessSpec& spec, std::size_t n_fine,
                                                SeedPolicy seed, std::uint64_t pair_index,
                                                FbmMethod method) {
  require_kind(spec, ProcessKind::FractionalBM);
  require_n(n_fine);
  const double hurst = std::get<FbmParams>(spec.params).hurst;
  const auto factor = fbm_factor(hurst, n_fine, method);
  const double scale = std::pow(spec.horizon / static_cast<double>(n_fine), hurst);
  CounterRng rng(seed, pair_index, StreamTag::FbmSpectral);

  std::vector<double> first(n_fine + 1, 0.0), second(n_fine + 1, 0.0);
  if (factor->method == FbmMethod::Circulant) {
    const std::size_t m = 2 * n_fine;
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      w[k] = factor->root[k] * std::complex<double>(z1, z2);
    }
    dft(w, -1);
    // Real and imaginary parts are independent exact samples.
    for (std::size_t i = 0; i < n_fine; ++i) {
      first[i + 1] = first[i] + scale * w[i].real();
      second[i + 1] = second[i] + scale * w[i].imag();
    }
  } else {
    std::vector<double> z(2 * n_fine);
    rng.fill_normal(z);
    const auto& l = factor->root;
    for (std::size_t i = 0; i < n_fine; ++i) {
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t k = 0; k <= i; ++k) {
        s1 += l[i * n_fine + k] * z[k];
        s2 += l[i * n_fine + k] * z[n_fine + k];
      }
      first[i + 1] = first[i] + scale * s1;
      second[i + 1] = second[i] + scale * s2;
    }
  }
  auto grid = [&](std::vector<double>& v, std::uint64_t replicate) {
    return randomize_initial(PathGrid::equispaced(spec.horizon, n_fine, std::move(v), 1),
                             spec.initial_law, seed, replicate);
  };
  return {grid(first, 2 * pair_index), grid(second, 2 * pair_index + 1)};
}

PathGrid simulate_fbm(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                      std::uint64_t replicate, FbmMethod method) {
  auto pair = simulate_fbm_pair(spec, n_fine, seed, replicate / 2, method);
  return (replicate & 1) ? std::move(pair.second) : std::move(pair.first);
}

PathGrid simulate_stable(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                         std::uint64_t replicate) {
  if (spec.kind() == ProcessKind::SymmetricStable) {
    const double g = std::get<StableParams>(spec.params).stability;
    if (!(g > 0.0 && g <= 2.0)) throw ParameterError("stability index must lie in (0, 2]");
  }
  require_kind(spec, ProcessKind::SymmetricStable);
  require_n(n_fine);
  const auto [gamma, c] = std::get<StableParams>(spec.params);
  const double dt = spec.horizon / static_cast<double>(n_fine);
  CounterRng rng(seed, replicate, StreamTag::StableIncrements);
  std::vector<double> values(n_fine + 1);
  values[0] = 0.0;
  if (gamma == 2.0) {
    const double sd = std::sqrt(2.0 * c * dt);
    for (std::size_t i = 0; i < n_fine; ++i) values[i + 1] = values[i] + sd * rng.normal();
  } else {
    const double scale = std::pow(c * dt, 1.0 / gamma);
    for (std::size_t i = 0; i < n_fine; ++i) {
      const double v = std::numbers::pi * (rng.uniform() - 0.5);
      const double w = rng.exponential();
      double x;
      if (gamma == 1.0) {
        x = std::tan(v);
      } else {
        x = std::sin(gamma * v) / std::pow(std::cos(v), 1.0 / gamma) *
            std::pow(std::cos((1.0 - gamma) * v) / w, (1.0 - gamma) / gamma);
      }
      values[i + 1] = values[i] + scale * x;
    }
  }
  return randomize_initial(PathGrid::equispaced(spec.horizon, n_fine, std::move(values), 1),
                           spec.initial_law, seed, replicate);
}

JumpRecord sample_compound_poisson_jumps(const ProcessSpec& spec, SeedPolicy seed,
                                         std::uint64_t replicate) {
  require_kind(spec, ProcessKind::CompoundPoisson);
  const auto& p = std::get<PoissonParams>(spec.params);
  const std::size_t d = spec.dim;
  CounterRng gaps(seed, replicate, StreamTag::PoissonJumps, 0);
  CounterRng sizes(seed, replicate, StreamTag::PoissonJumps, 1);
  JumpRecord rec;
  double t = gaps.exponential() / p.rate;
  while (t <= spec.horizon) {
    rec.times.push_back(t);
    for (std::size_t j = 0; j < d; ++j) {
      double y = 0.0;
      if (const auto* pm = std::get_if<PointMassJump>(&p.jumps)) {
        y = pm->size;
      } else if (const auto* g = std::get_if<GaussianJump>(&p.jumps)) {
        y = g->mean + g->stddev * sizes.normal();
      } else {
        const auto& r = std::get<RademacherJump>(p.jumps);
        y = sizes.uniform() < 0.5 ? -r.size : r.size;
      }
      rec.sizes.push_back(y);
    }
    t += gaps.exponential() / p.rate;
  }
  return rec;
}

PathGrid simulate_compound_poisson(const ProcessSpec& spec, std::size_t n_fine,
                                   SeedPolicy seed, std::uint64_t replicate) {
  if (spec.kind() == ProcessKind::CompoundPoisson &&
      !(std::get<PoissonParams>(spec.params).rate > 0.0)) {
    throw ParameterError("jump rate must be positive");
  }
  require_n(n_fine);
  const JumpRecord jumps = sample_compound_poisson_jumps(spec, seed, replicate);
  const std::size_t d = spec.dim;
  std::vector<double> values((n_fine + 1) * d, 0.0);
  std::vector<double> level(d, 0.0);
  std::size_t next = 0;
  for (std::size_t i = 0; i <= n_fine; ++i) {
    const double t = spec.horizon * static_cast<double>(i) / static_cast<double>(n_fine);
    while (next < jumps.times.size() && jumps.times[next] <= t) {
      for (std::size_t j = 0; j < d; ++j) level[j] += jumps.sizes[next * d + j];
      ++next;
    }
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] = level[j];
  }
  return randomize_initial(PathGrid::equispaced(spec.horizon, n_fine, std::move(values), d),
                           spec.initial_law, seed, replicate);
}

PathGrid simulate(const ProcessSpec& spec, std::size_t n_fine, SeedPolicy seed,
                  std::uint64_t replicate) {
  switch (spec.kind()) {
    case ProcessKind::BrownianMotion: return simulate_bm(spec, n_fine, seed, replicate);
    case ProcessKind::ItoDiffusion: return simulate_diffusion(spec, n_fine, seed, replicate);
    case ProcessKind::FractionalBM: return simulate_fbm(spec, n_fine, seed, replicate);
    case ProcessKind::SymmetricStable: return simulate_stable(spec, n_fine, seed, replicate);
    case ProcessKind::CompoundPoisson:
      return simulate_compound_poisson(spec, n_fine, seed, replicate);
  }
  throw ParameterError("unknown process kind");
}

std::vector<double> sample_initial(const InitialLaw& law, std::size_t dim, SeedPolicy seed,
                                   std::uint64_t replicate) {
  if (const auto* pt = std::get_if<PointLaw>(&law)) {
    if (pt->x0.empty()) return std::vector<double>(dim, 0.0);
    if (pt->x0.size() != dim) throw ParameterError("initial point has wrong dimension");
    return pt->x0;
  }
  CounterRng rng(seed, replicate, StreamTag::InitialLaw);
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    if (g->mean.size() != dim || g->covariance.size() != dim * dim) {
      throw ParameterError("Gaussian initial law has wrong dimension");
    }
    const auto l = lower_cholesky(g->covariance, dim);
    std::vector<double> z(dim);
    rng.fill_normal(z);
    std::vector<double> x = g->mean;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k <= i; ++k) x[i] += l[i * dim + k] * z[k];
    }
    return x;
  }
  auto x = std::get<SamplerLaw>(law).sample(rng);
  if (x.size() != dim) throw ParameterError("initial sampler returned wrong dimension");
  return x;
}

PathGrid randomize_initial(const PathGrid& path, const InitialLaw& law, SeedPolicy seed,
                           std::uint64_t replicate) {
  const auto x0 = sample_initial(law, path.dim(), seed, replicate);
  bool zero = true;
  for (double v : x0) zero = zero && v == 0.0;
  if (zero) return path;
  std::vector<double> values = path.values();
  const std::size_t d = path.dim();
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] += x0[j];
  }
  return PathGrid(path.times(), std::move(values), d);
}

PathGrid subsample(const PathGrid& path, std::size_t n) {
  if (n == 0) throw ParameterError("skeleton needs n >= 1");
  const std::size_t fine = path.intervals();
  if (fine == 0 || fine % n != 0) {
    throw AlignmentError("n = " + std::to_string(n) + " does not divide the " +
                         std::to_string(fine) + " fine intervals");
  }
  if (!path.is_equispaced()) throw AlignmentError("subsample needs an equispaced path");
  const std::size_t step = fine / n;
  const std::size_t d = path.dim();
  std::vector<double> t(n + 1), v((n + 1) * d);
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = path.times()[k * step];
    for (std::size_t j = 0; j < d; ++j) v[k * d + j] = path.value(k * step, j);
  }
  return PathGrid(std::move(t), std::move(v), d);
}

}  // namespace occlab
