#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "augpe/common.hpp"

namespace augpe {

/// Role of a random stream within one run. Part of the stream key, so that
/// e.g. generation randomness can never perturb the DP noise sequence.
enum class StreamPurpose : std::uint64_t {
  kRandomInit = 1,
  kVoteNoise = 2,
  kVariation = 3,
  kSelection = 4,
  kBackend = 5,
  kRetry = 6,
  kCorpus = 7,
  kMetrics = 8,
  kLookahead = 9,
};

/// Addresses one independent random stream: (seed, scope, iteration,
/// sample_index, purpose, round). `scope` separates per-class runs in
/// conditional mode; everything else matches the loop coordinates.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t scope = 0;
  std::uint64_t iteration = 0;
  std::uint64_t sample_index = 0;
  StreamPurpose purpose = StreamPurpose::kRandomInit;
  std::uint64_t round = 0;

  StreamKey with_purpose(StreamPurpose p) const {
    StreamKey k = *this;
    k.purpose = p;
    return k;
  }

  std::uint64_t mixed() const {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ scope);
    h = splitmix64(h ^ iteration);
    h = splitmix64(h ^ sample_index);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ round);
    return h;
  }
};

/// Deterministic random stream. The underlying mt19937_64 sequence is fixed
/// by the standard, and the uniform/gaussian mappings are implemented here,
/// so identical keys give bitwise-identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  explicit Rng(const StreamKey& key) : gen_(key.mixed()) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw DomainError("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via the polar (Marsaglia) method.
  double gaussian() {
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
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace augpe
