#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace sidiff {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of one sample path, keyed on (master seed, replicate, path).
///
/// The pair (replicate, path) is packed into one 64-bit counter, which is
/// injective while both indices stay below 2^32. For a fixed master seed the
/// map counter -> mix(master + gamma * (counter + 1)) is a bijection (gamma is
/// odd and mix is invertible), so distinct paths never share a seed.
constexpr std::uint64_t derive_path_seed(std::uint64_t master_seed,
                                         std::uint32_t replicate_index,
                                         std::uint32_t path_index) noexcept {
  const std::uint64_t counter =
      (static_cast<std::uint64_t>(replicate_index) << 32) | path_index;
  return splitmix64_mix(master_seed + 0x9e3779b97f4a7c15ULL * (counter + 1));
}

/// xoshiro256** generator; satisfies UniformRandomBitGenerator. State is
/// expanded from a single 64-bit seed with SplitMix64, so the stream depends
/// on the seed alone and not on the platform's standard library.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto &word : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = splitmix64_mix(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

/// Standard normal variates by the Marsaglia polar method. Written out here
/// rather than using std::normal_distribution, whose algorithm differs
/// between standard library implementations.
class StandardNormal {
public:
  explicit StandardNormal(std::uint64_t seed) noexcept : engine_(seed) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * engine_.uniform() - 1.0;
      v = 2.0 * engine_.uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

private:
  Xoshiro256 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace sidiff
