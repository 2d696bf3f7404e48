#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace memix::detail {

// std::mt19937_64's output sequence is fixed by the standard; the
// distribution adapters are not. These helpers keep generated artifacts
// byte-identical across standard library implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Lemire-style rejection on the top of the range.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline float uniform_unit(std::mt19937_64& rng) {
  return static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
}

inline std::vector<std::uint64_t> random_permutation(std::mt19937_64& rng, std::uint64_t n) {
  std::vector<std::uint64_t> p(n);
  std::iota(p.begin(), p.end(), std::uint64_t{0});
  for (std::uint64_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[uniform_below(rng, i)]);
  }
  return p;
}

}  // namespace memix::detail
