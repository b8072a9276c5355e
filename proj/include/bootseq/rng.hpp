#pragma once

// Portable random helpers. std::mt19937_64 is fully specified by the standard,
// the std:: distributions are not, so every draw goes through these instead.

#include <cstdint>
#include <random>
#include <string_view>

namespace bootseq::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform integer in [0, n), n > 0 (Lemire multiply-shift, bias < 2^-64 * n).
inline std::uint64_t index(Engine& g, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(g()) * n) >> 64);
}

// Uniform double in [0, 1).
inline double unit(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Engine& g, double p) { return p > 0.0 && unit(g) < p; }

}  // namespace bootseq::rng
