#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "gmrf/vec.hpp"

namespace gmrf::rng {

// Deterministic child stream addressed by (seed, a, b, c).  Every consumer of
// the same address sees the same draws, so parallel and serial execution of a
// probe or chain schedule produce bit-identical values.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c),
                    static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

inline void fill_standard_normal(std::mt19937_64& eng, std::span<double> out) {
  std::normal_distribution<double> dist;
  for (double& x : out) x = dist(eng);
}

inline Vector standard_normal(std::mt19937_64& eng, std::size_t n) {
  Vector v(n);
  fill_standard_normal(eng, v);
  return v;
}

inline void fill_rademacher(std::mt19937_64& eng, std::span<double> out) {
  for (double& x : out) x = (eng() >> 63) ? 1.0 : -1.0;
}

}  // namespace gmrf::rng
