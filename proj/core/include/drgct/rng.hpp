#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace drgct {

/// splitmix64 finalizer; the basis for all seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeding domains. Streams in distinct domains are independent even for
/// the same master seed, so e.g. the same data can be re-bootstrapped
/// without disturbing model training.
enum class SeedDomain : std::uint64_t {
  Data = 0x01,
  MlpInit = 0x02,
  MdnInit = 0x03,
  Shuffle = 0x04,
  FreqPairs = 0x05,
  CfSampling = 0x06,
  Bootstrap = 0x07,
  Experiment = 0x08,
  RealData = 0x09,
};

/// Counter-based derivation: mixes the master seed with a domain tag and up
/// to three indices. Derived seeds depend only on the arguments, never on
/// call order.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(master ^ (static_cast<std::uint64_t>(domain) *
                                         0xd6e8feb86659fd93ULL));
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

/// Uniform double in [0, 1) from one 64-bit word (53 mantissa bits).
constexpr double to_unit_double(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Seeded random stream. Wraps mt19937_64 with hand-rolled uniform and
/// normal samplers so draw sequences do not depend on the standard
/// library's unspecified distribution algorithms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return to_unit_double(next_u64()); }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal via Marsaglia's polar method; caches the spare.
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
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  /// Uniform integer in [0, n). n must be >= 1; slight modulo bias is
  /// irrelevant at the sizes used here (n <= a few thousand).
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace drgct
