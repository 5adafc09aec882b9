#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace beb {

using Stream = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a path of indices below `seed` (e.g. {cell, replicate}).
/// Distinct paths give statistically independent streams; the result does not
/// depend on the order in which children are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : path) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Stream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Stream(derive_seed(seed, path));
}

/// Uniform index in [0, n) by rejection; a generator stuck at its minimum
/// always yields 0.
template <class URBG>
std::size_t uniform_index(URBG& g, std::size_t n) {
  using R = typename URBG::result_type;
  const std::uint64_t range = static_cast<std::uint64_t>(URBG::max() - URBG::min());
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  if (range == ~std::uint64_t{0}) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    while (true) {
      const std::uint64_t v = static_cast<std::uint64_t>(static_cast<R>(g() - URBG::min()));
      if (v <= limit) return static_cast<std::size_t>(v % bound);
    }
  }
  const std::uint64_t span = range + 1;
  const std::uint64_t limit = span - span % bound;
  while (true) {
    const std::uint64_t v = static_cast<std::uint64_t>(g() - URBG::min());
    if (v < limit) return static_cast<std::size_t>(v % bound);
  }
}

}  // namespace beb
