#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace latdec {

using Rng = std::mt19937_64;

// Purposes a per-example stream can be drawn for. Keep values stable:
// they feed the seed derivation and changing one changes every output.
enum class SeedPurpose : std::uint64_t { search = 1, self_bleu = 2, edit_distance = 3, sample_match = 4, oracle = 5 };

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based split of a root seed: the stream for (example, purpose)
// does not depend on how many other examples exist.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t example, SeedPurpose purpose) {
  return mix64(mix64(root ^ mix64(example + 1)) + static_cast<std::uint64_t>(purpose));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Uniform integer in [0, n). Portable across standard libraries, unlike
// std::uniform_int_distribution.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace latdec
