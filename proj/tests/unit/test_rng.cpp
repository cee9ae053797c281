#include <doctest.h>

#include <cmath>
#include <vector>

#include "occlab/error.hpp"
#include "occlab/rng.hpp"
#include "occlab/stats.hpp"

using namespace occlab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their address") {
  CounterRng a(SeedPolicy{7}, 3, StreamTag::BrownianBase, 2);
  CounterRng b(SeedPolicy{7}, 3, StreamTag::BrownianBase, 2);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  CounterRng other_tag(SeedPolicy{7}, 3, StreamTag::InitialLaw, 2);
  CounterRng other_rep(SeedPolicy{7}, 4, StreamTag::BrownianBase, 2);
  CounterRng other_seed(SeedPolicy{8}, 3, StreamTag::BrownianBase, 2);
  CounterRng c(SeedPolicy{7}, 3, StreamTag::BrownianBase, 2);
  const auto x = c();
  CHECK(x != other_tag());
  CHECK(x != other_rep());
  CHECK(x != other_seed());
}

TEST_CASE("normal_pair_at matches sequential draws") {
  CounterRng seq(SeedPolicy{11}, 0, StreamTag::BrownianBridge, 5);
  const CounterRng random_access(SeedPolicy{11}, 0, StreamTag::BrownianBridge, 5);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const double z0 = seq.normal();
    const double z1 = seq.normal();
    const auto [a, b] = random_access.normal_pair_at(k);
    CHECK(z0 == a);
    CHECK(z1 == b);
  }
}

TEST_CASE("uniforms stay inside the open interval") {
  CHECK(uniform_from_bits(0) > 0.0);
  CHECK(uniform_from_bits(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("replicate index above 2^56 is rejected") {
  CHECK_THROWS_AS(CounterRng(SeedPolicy{1}, std::uint64_t{1} << 56, StreamTag::Pilot),
                  ParameterError);
  CHECK_NOTHROW(CounterRng(SeedPolicy{1}, (std::uint64_t{1} << 56) - 1, StreamTag::Pilot));
}

TEST_CASE("normal and exponential moments") {
  CounterRng rng(SeedPolicy{2024}, 0, StreamTag::Pilot);
  const std::size_t N = 200000;
  std::vector<double> z(N), e(N), u(N);
  for (std::size_t i = 0; i < N; ++i) {
    z[i] = rng.normal();
    e[i] = rng.exponential();
    u[i] = rng.uniform();
  }
  const Moments mz = moments(z), me = moments(e), mu = moments(u);
  CHECK(std::abs(mz.mean) < 4.0 / std::sqrt(N));
  CHECK(std::abs(mz.variance - 1.0) < 4.0 * std::sqrt(2.0 / N));
  CHECK(std::abs(me.mean - 1.0) < 4.0 / std::sqrt(N));
  CHECK(std::abs(mu.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / N));
  CHECK(ks_distance_normal(z) < 1.36 / std::sqrt(static_cast<double>(N)) * 1.5);
}
