#include "occlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "occlab/error.hpp"

namespace occlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::pair<double, double> box_muller(std::uint64_t a, std::uint64_t b) {
  const double u1 = uniform_from_bits(a);
  const double u2 = uniform_from_bits(b);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Capability: return "capability error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Model: return "model error";
    case ErrorKind::Resolution: return "resolution error";
    case ErrorKind::Coverage: return "coverage error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Oracle: return "oracle error";
    case ErrorKind::Simulation: return "simulation error";
    case ErrorKind::Fit: return "fit error";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double uniform_from_bits(std::uint64_t bits) noexcept {
  // 52 random bits, shifted by half a step so that neither 0 nor 1 is
  // returned: the largest value is 1 - 2^-53, which is representable.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

CounterRng::CounterRng(SeedPolicy seed, std::uint64_t replicate, StreamTag tag,
                       std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      substream_(substream),
      replicate_lo_(static_cast<std::uint32_t>(replicate)) {
  if ((replicate >> 32) >= (1u << 24)) {
    throw ParameterError("replicate index exceeds 2^56");
  }
  tag_word_ = (static_cast<std::uint32_t>(tag) << 24) ^
              static_cast<std::uint32_t>(replicate >> 32);
}

Philox4x32::Counter CounterRng::counter_for(std::uint64_t index) const {
  if (index >> 32) {
    throw ParameterError("random stream exhausted (more than 2^32 blocks)");
  }
  return {static_cast<std::uint32_t>(index), substream_, replicate_lo_,
          tag_word_};
}

void CounterRng::refill() {
  buffer_ = Philox4x32::block(counter_for(next_block_++), key_);
  buffered_words_ = 4;
}

CounterRng::result_type CounterRng::operator()() {
  if (buffered_words_ < 2) refill();
  const int i = 4 - buffered_words_;
  buffered_words_ -= 2;
  return (static_cast<std::uint64_t>(buffer_[i]) << 32) | buffer_[i + 1];
}

double CounterRng::uniform() { return uniform_from_bits((*this)()); }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const std::uint64_t a = (*this)();
  const std::uint64_t b = (*this)();
  auto [z0, z1] = box_muller(a, b);
  spare_normal_ = z1;
  has_spare_ = true;
  return z0;
}

double CounterRng::exponential() { return -std::log(uniform()); }

void CounterRng::fill_normal(std::span<double> out) {
  for (double& z : out) z = normal();
}

std::pair<double, double> CounterRng::normal_pair_at(std::uint64_t index) const {
  const auto w = Philox4x32::block(counter_for(index), key_);
  const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
  return box_muller(a, b);
}

}  // namespace occlab
