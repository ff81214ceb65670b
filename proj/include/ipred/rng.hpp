// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation built on splitmix64.
//
// Every stochastic quantity in the simulator is drawn from its own stream,
// keyed by (seed, purpose tag, indices...).  Because a stream is a pure
// function of its key, a channel realisation for (ue, cell, tti) is the same
// no matter which scheduler asks for it, which thread computes it, or which
// other links were drawn before it.  That keying is what makes runs
// reproducible bit-for-bit across thread counts and monitored-UE choices.
//
// splitmix64 is tiny, passes BigCrush, and is trivially portable; the
// generator below never depends on libstdc++ distribution internals, so
// streams are stable across standard library versions.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace ipred {

// One splitmix64 step: advances the state and returns a mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Avalanches `v` into `h`.  Used to fold stream keys (tags, indices) into a
// base seed; the full mixing makes nearby keys produce unrelated streams.
inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed, tag);
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t a) {
  return mix64(mix64(seed, tag), a);
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(mix64(seed, tag), a), b);
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return mix64(mix64(mix64(mix64(seed, tag), a), b), c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); rejection sampling keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via the Marsaglia polar method; the spare value is
  // cached, so draws come in deterministic stream order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  // Circularly-symmetric complex normal with total variance `var`
  // (var/2 per real and imaginary part).
  std::complex<double> cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Purpose tags for derived streams.  Values are arbitrary but frozen:
// changing them would change every simulation output for a given seed.
namespace stream_tag {
inline constexpr std::uint64_t kScenario = 0x5343454e41ULL;  // network layout
inline constexpr std::uint64_t kFading = 0x46414445ULL;      // per-TTI NLOS
inline constexpr std::uint64_t kDrop = 0x44524f50ULL;        // per-drop seeds
}  // namespace stream_tag

}  // namespace ipred
