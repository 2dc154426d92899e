#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace kcoddp {

/// SplitMix64 finalizer, used to derive independent seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Random stream with explicit ownership. Streams are never shared between
/// workers; use derive() to obtain a child stream for a chain, fold or
/// Monte Carlo replicate block.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  /// Child stream keyed by (this seed, stream id). Does not advance *this.
  Rng derive(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
  }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  /// Uniform on (0, 1); safe to take logs of.
  double uniform_open() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return u;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return std_normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// |N(0,1)|, i.e. N(0,1) restricted to (0, inf).
  double half_normal() {
    double e;
    do { e = std::fabs(normal()); } while (e <= 0.0);
    return e;
  }

  /// Beta(1, alpha), kept strictly inside (0, 1) even when alpha is tiny.
  double beta_one(double alpha) {
    const double v = -std::expm1(std::log(uniform_open()) / alpha);
    return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
  }

  /// +1 or -1 with probability 1/2 each.
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace kcoddp
