#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "fbsdelta/types.hpp"

namespace fbsdelta {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. Every consumer derives its own stream from the
// single master seed via (label, counter), so sweeps can be re-ordered or run
// in parallel without changing any drawn sample. The uniform and normal
// transforms are implemented here rather than taken from <random> so that the
// produced values are pinned to the bit.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view label, std::uint64_t counter = 0) {
    state_ = master_seed;
    state_ ^= fnv1a64(label);
    state_ ^= counter * 0x9e3779b97f4a7c15ULL;
    // burn-in decorrelates nearby (seed, label, counter) triples
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller (no caching, fully deterministic)
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  Index uniform_index(Index n) {
    return n <= 1 ? 0 : static_cast<Index>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <typename Scalar>
  VecX<Scalar> uniform_vector(Index dim, double lo, double hi) {
    VecX<Scalar> v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = static_cast<Scalar>(uniform(lo, hi));
    return v;
  }

  template <typename Scalar>
  VecX<Scalar> normal_vector(Index dim) {
    VecX<Scalar> v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = static_cast<Scalar>(normal());
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace fbsdelta
