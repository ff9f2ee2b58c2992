#pragma once

// Seeded random streams.
//
// One root seed drives a whole run. Every stochastic consumer asks for its
// own substream by label, e.g. derive(root, "fading", case, snr_index). The
// label path is folded through FNV-1a and splitmix64, so the same path always
// yields the same 64-bit engine seed, and distinct paths give unrelated seeds.
//
// The engine is std::mt19937_64 (fully specified by the standard). Uniform and
// Gaussian variates are produced here rather than through <random>
// distributions, whose algorithms are implementation-defined.

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "islchan/constants.hpp"

namespace islchan {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the substream (root, label, indices...).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::initializer_list<std::uint64_t> indices = {}) noexcept {
  std::uint64_t s = mix64(root ^ mix64(fnv1a(label)));
  for (std::uint64_t i : indices) s = mix64(s ^ mix64(i + 0x632BE59BD9B4E019ULL));
  return s;
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t root, std::string_view label,
                    std::initializer_list<std::uint64_t> indices = {}) {
    return Rng(derive_seed(root, label, indices));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Uniform integer in [0, n). Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do r = engine_();
    while (r >= limit);
    return r % n;
  }

  bool bit() { return (engine_() >> 63) != 0; }

  /// Standard normal (Box-Muller, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = constants::two_pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly-symmetric complex Gaussian with E|w|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace islchan
