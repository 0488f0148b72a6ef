#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace hspn {

/// Deterministic random source. The engine is std::mt19937_64 (whose output
/// sequence is fixed by the standard) and every distribution transform is
/// implemented here rather than delegated to libstdc++, so a seed fully pins
/// the stream regardless of standard-library version.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (the cosine branch only, so the state
  /// is exactly the engine state).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Serialize/restore engine state (textual, platform independent).
  std::string save_state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }
  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
  }

  /// Derive an independent stream, e.g. one per sample id.
  static Rng derive(uint64_t seed, uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream)));
  }

  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hspn
