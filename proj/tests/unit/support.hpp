#pragma once

// Small property-testing kit: seeded generators plus a loop that reports the failing seed.

#include <cmath>
#include <cstdint>
#include <random>

#include "doctest.h"
#include "glayers/error.hpp"
#include "glayers/gradcheck.hpp"
#include "glayers/random.hpp"
#include "glayers/tensor.hpp"

namespace prop {

using glayers::Shape;
using glayers::Tensor;

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed), seed(seed) {}
  glayers::Rng rng;
  std::uint64_t seed;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  Tensor normal_tensor(const Shape& dims) { return glayers::randn(dims, rng); }
  Tensor uniform_tensor(const Shape& dims, double lo, double hi) {
    Tensor t(dims);
    for (double& v : t.values()) v = uniform(lo, hi);
    return t;
  }
};

/// Runs body(gen) for `trials` independent seeds. On failure doctest prints the seed to replay.
template <class F>
void for_all(int trials, std::uint64_t base_seed, F&& body) {
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed * 1000003ULL + static_cast<std::uint64_t>(t);
    INFO("property trial " << t << " seed " << seed);
    Gen g(seed);
    body(g);
  }
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Expects `expr` to throw glayers::Error of the given kind.
#define CHECK_ERROR_KIND(expr, k)                                      \
  do {                                                                 \
    bool thrown_ = false;                                              \
    try {                                                              \
      (void)(expr);                                                    \
    } catch (const glayers::Error& e_) {                               \
      thrown_ = true;                                                  \
      CHECK_MESSAGE(e_.kind() == (k), "unexpected error: " << std::string(e_.what())); \
    }                                                                  \
    CHECK_MESSAGE(thrown_, "expected an error from " #expr);           \
  } while (0)

}  // namespace prop
