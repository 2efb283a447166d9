#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "glayers/tensor.hpp"

namespace glayers {

using ScalarField = std::function<double(const Tensor&)>;
using ValueAndGrad = std::function<std::pair<double, Tensor>(const Tensor&)>;
using LinearMap = std::function<Tensor(const Tensor&)>;

/// Taylor-remainder convergence test. For a unit direction dx drawn from `seed`,
/// E(eps) = |f(x + eps dx) - f(x) - eps <grad, dx>| over eps = 1e-1 ... 1e-5.
struct FdConvergence {
  std::vector<double> eps;
  std::vector<double> error;
  double slope = 0.0;  // least-squares slope of log E against log eps
  bool exact_to_roundoff = false;
};

FdConvergence fd_convergence_test(const ScalarField& f, const Tensor& x, const Tensor& grad,
                                  std::uint64_t seed);
FdConvergence fd_convergence_test(const ValueAndGrad& fg, const Tensor& x, std::uint64_t seed);

/// Directional derivative J dx of a vector function by fourth-order central differences.
Tensor directional_derivative(const LinearMap& f, const Tensor& x, const Tensor& dx, double h = 1e-3);

/// Relative mismatch |<J dx, y> - <dx, vjp(y)>| / max(|<J dx, y>|, |<dx, vjp(y)>|) for random dx, y.
double dot_test(const LinearMap& jvp, const LinearMap& vjp, const Shape& in_dims, const Shape& out_dims,
                std::uint64_t seed);

}  // namespace glayers
