#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace occlab {

/// Master seed of an experiment. Every random draw in the library is a pure
/// function of (master_seed, replicate, stream tag, substream, draw index).
struct SeedPolicy {
  std::uint64_t master_seed = 0;
};

/// Separates the randomness consumed by different parts of a replicate so
/// that, e.g., adding an initial-law draw never shifts the path increments.
enum class StreamTag : std::uint32_t {
  BrownianBase = 1,
  BrownianBridge = 2,
  FbmSpectral = 3,
  StableIncrements = 4,
  PoissonJumps = 5,
  InitialLaw = 6,
  BridgeFill = 7,
  Pilot = 8,
};

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3").
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Counter-based stream keyed on the master seed. Draws are addressed by
/// block index, so any draw can be recomputed independently of the others and
/// of the thread that asks for it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(SeedPolicy seed, std::uint64_t replicate, StreamTag tag,
             std::uint32_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  void fill_normal(std::span<double> out);

  /// The two standard normals stored in block `index` of this stream.
  std::pair<double, double> normal_pair_at(std::uint64_t index) const;

 private:
  Philox4x32::Counter counter_for(std::uint64_t index) const;
  void refill();

  Philox4x32::Key key_{};
  std::uint32_t substream_ = 0;
  std::uint32_t replicate_lo_ = 0;
  std::uint32_t tag_word_ = 0;
  std::uint64_t next_block_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_words_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

double uniform_from_bits(std::uint64_t bits) noexcept;

}  // namespace occlab
