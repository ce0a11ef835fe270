#pragma once

#include <cmath>
#include <cstdint>

namespace triroc {

// Counter-based stream: output i is mix64(key + i * GAMMA), i.e. splitmix64
// with the key as starting state. Streams are value types; substream(tag)
// derives an independent stream whose key is a bijection of (key, tag), so
// distinct tags can never collide under the same parent. This is what makes
// simulation replications independent of execution order: every (replication,
// bootstrap iteration, attempt) owns a stream derived purely from indices.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix64(key_ + (counter_++) * kGamma); }

  // Strictly inside (0, 1): (u64 >> 11) + 0.5 scaled by 2^-53.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Marsaglia polar method. The second variate is discarded: caching it would
  // make the stream's output depend on call history, breaking the guarantee
  // that results are a pure function of (key, draw sequence).
  double next_normal() {
    for (;;) {
      const double u = 2.0 * next_uniform() - 1.0;
      const double v = 2.0 * next_uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Unbiased-enough index draw for resampling (bias < 2^-53 for n below 2^11).
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  RandomStream substream(std::uint64_t tag) const {
    return RandomStream(mix64(key_ + mix64(tag)));
  }

  std::uint64_t key() const { return key_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace triroc
