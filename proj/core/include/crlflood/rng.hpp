#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace crlflood {

/// Deterministic random stream. Wraps mt19937_64 but does its own bounded
/// sampling so that draws are reproducible across standard libraries
/// (std::uniform_int_distribution is implementation-defined).
class Rng {
 public:
  Rng() : gen_(0x9e3779b97f4a7c15ull) {}
  explicit Rng(uint64_t seed) { reseed(seed); }
  Rng(uint64_t seed, uint64_t stream) { reseed(seed, stream); }

  void reseed(uint64_t seed, uint64_t stream = 0) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
    gen_.seed(seq);
  }

  uint64_t next_u64() { return gen_(); }

  /// Unbiased integer in [0, bound). bound must be >= 1.
  uint64_t bounded(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  int index(size_t size) { return static_cast<int>(bounded(size)); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

  template <typename T>
  const T& pick(std::span<const T> v) {
    return v[bounded(v.size())];
  }

 private:
  std::mt19937_64 gen_;
};

/// Named substreams of a single run seed. Each subsystem draws from its own
/// stream so that changing one subsystem's draw count does not perturb the
/// others; scheme A/B comparisons then share identical mobility and MAC
/// randomness.
struct RngStreams {
  Rng mobility;
  Rng mac;
  Rng scheme;
  Rng channel;
  Rng adversary;

  explicit RngStreams(uint64_t seed)
      : mobility(seed, 1), mac(seed, 2), scheme(seed, 3), channel(seed, 4), adversary(seed, 5) {}
};

}  // namespace crlflood
