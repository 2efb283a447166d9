#pragma once

#include <cstdint>
#include <random>

#include "glayers/tensor.hpp"

namespace glayers {

using Rng = std::mt19937_64;

inline Tensor randn(const Shape& dims, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Tensor t(dims);
  for (double& v : t.values()) v = nd(rng);
  return t;
}

inline Tensor randn(const Shape& dims, std::uint64_t seed) {
  Rng rng(seed);
  return randn(dims, rng);
}

/// Random direction with unit l2 norm.
inline Tensor unit_direction(const Shape& dims, std::uint64_t seed) {
  Tensor t = randn(dims, seed);
  return scaled(t, 1.0 / norm2(t));
}

}  // namespace glayers
