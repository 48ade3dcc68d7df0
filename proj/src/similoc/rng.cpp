#include "similoc/rng.hpp"

#include <cmath>

#include "similoc/angles.hpp"

namespace similoc {

double Rng::gaussian() {
  // Box-Muller; u1 nudged away from 0 so log() stays finite.
  double u1 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name, then mix in the seed with splitmix64 rounds.
  std::uint64_t h = 1469598103934665603ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Rng Rng::sub_stream(std::string_view name, std::uint64_t counter) const {
  return Rng(derive_seed(derive_seed(seed_, name) + counter, name));
}

}  // namespace similoc
