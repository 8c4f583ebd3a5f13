#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nsdt {

// Counter-based deterministic random stream. Every draw is a pure function of
// (key, counter), so streams can be split per episode / per component without
// any shared state, and replays are exact regardless of evaluation order.
class Rng {
 public:
  explicit Rng(uint64_t key) : key_(key) {}

  // Derives an independent stream; used to key per-episode and per-component
  // streams from one top-level seed.
  static Rng keyed(uint64_t seed, uint64_t stream, uint64_t substream = 0) {
    uint64_t k = mix(seed ^ 0x243f6a8885a308d3ULL);
    k = mix(k ^ stream);
    k = mix(k ^ (substream + 0x13198a2e03707344ULL));
    return Rng(k);
  }

  uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // Uniform in [0, 1).
  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; self-contained so streams are
  // reproducible across standard libraries.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    while (u1 <= 0.0) u1 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  static uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nsdt
