#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace similoc {

// Deterministic random source. Distribution code is hand-rolled on top of
// mt19937_64 so streams are reproducible across standard libraries;
// std::uniform_real_distribution and friends are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be nonzero.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = gen_(); } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; draws two uniforms per call.
  double gaussian();
  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  // Independent stream derived from this stream's seed and a name. Streams
  // with distinct names never share state with the parent or each other.
  Rng sub_stream(std::string_view name) const { return Rng(derive_seed(seed_, name)); }
  Rng sub_stream(std::string_view name, std::uint64_t counter) const;

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace similoc
