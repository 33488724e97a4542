#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace skewgcn {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream splitting: every random stream is identified by the master seed, a
// component label and up to three indices. The label is folded with FNV-1a,
// then each field passes through splitmix64 in order.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::string_view label,
                                           std::uint64_t a = 0,
                                           std::uint64_t b = 0,
                                           std::uint64_t c = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = splitmix64(master ^ h);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

inline Rng make_rng(std::uint64_t master, std::string_view label,
                    std::uint64_t a = 0, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
  return Rng(derive_seed(master, label, a, b, c));
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; platform independent.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Standard normal via Box-Muller on uniform01; platform independent.
inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace skewgcn
