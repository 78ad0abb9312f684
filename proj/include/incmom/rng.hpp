#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace incmom::rng {

using Engine = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Purpose tags keep streams for different consumers of the same
// (seed, index) pair disjoint.
enum class Stream : std::uint64_t {
  Sample = 0x53414D50ULL,
  Bootstrap = 0x424F4F54ULL,
  Timing = 0x54494D45ULL,
};

/// Derives a 64-bit key from a root seed and a path of stream coordinates.
[[nodiscard]] constexpr std::uint64_t derive_key(std::uint64_t seed,
                                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t k = splitmix64(seed);
  for (std::uint64_t c : path) k = splitmix64(k ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
  return k;
}

/// An engine whose state depends only on (seed, path), never on which thread
/// or in which order it was created.
[[nodiscard]] inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  const std::uint64_t k = derive_key(seed, path);
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

[[nodiscard]] inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return make_engine(seed, {static_cast<std::uint64_t>(stream), index});
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
[[nodiscard]] inline double open_uniform(Engine& eng) noexcept {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unbiased uniform index in [0, n) by Lemire's multiply-shift. Fully
/// specified, so results do not depend on the standard library in use.
[[nodiscard]] inline std::size_t uniform_index(Engine& eng, std::size_t n) noexcept {
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = eng();
    const unsigned __int128 m = static_cast<unsigned __int128>(r) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
  }
}

}  // namespace incmom::rng
