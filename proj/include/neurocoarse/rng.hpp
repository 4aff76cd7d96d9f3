#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace neurocoarse::rng {

// splitmix64 finalizer; used to derive well-separated child seeds and to
// expand a single seed into engine state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the salt-th child stream of `base`. Children of distinct salts are
// statistically independent for practical purposes.
inline std::uint64_t derive(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

// One independent random stream. The engine is xoshiro256++ (Blackman &
// Vigna, public domain) with splitmix64 state expansion: per-copy streams are
// constructed by the million, so state setup and draw cost both matter, and
// the sequence is identical on every platform. A stream belongs to exactly
// one realization/worker; never share across threads.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    const std::uint64_t out = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

  // uniform in [0, 1), 53-bit mantissa
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n); Lemire's multiply-shift with rejection
  std::uint32_t below(std::uint32_t n) {
    std::uint64_t m =
        static_cast<std::uint64_t>(static_cast<std::uint32_t>((*this)() >> 32)) * n;
    auto lo = static_cast<std::uint32_t>(m);
    if (lo < n) {
      const std::uint32_t t = (0u - n) % n;
      while (lo < t) {
        m = static_cast<std::uint64_t>(
                static_cast<std::uint32_t>((*this)() >> 32)) *
            n;
        lo = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // standard normal via Marsaglia polar, spare cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace neurocoarse::rng
