#include "glayers/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glayers/error.hpp"
#include "glayers/random.hpp"

namespace glayers {

FdConvergence fd_convergence_test(const ScalarField& f, const Tensor& x, const Tensor& grad,
                                  std::uint64_t seed) {
  require_same_dims(x, grad, "fd_convergence_test");
  const Tensor dx = unit_direction(x.dims(), seed);
  const double f0 = f(x);
  const double slope0 = dot(grad, dx);
  const double floor = 1e2 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f0));

  FdConvergence out;
  for (double eps = 1e-1; eps > 0.5e-5; eps *= 0.1) {
    const double fe = f(axpy(eps, dx, x));
    out.eps.push_back(eps);
    out.error.push_back(std::abs(fe - f0 - eps * slope0));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    if (!(out.error[i] > floor)) continue;
    const double lx = std::log(out.eps[i]), ly = std::log(out.error[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++n;
  }
  if (n < 2) {
    out.exact_to_roundoff = true;
    out.slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

FdConvergence fd_convergence_test(const ValueAndGrad& fg, const Tensor& x, std::uint64_t seed) {
  const Tensor g = fg(x).second;
  return fd_convergence_test([&](const Tensor& y) { return fg(y).first; }, x, g, seed);
}

Tensor directional_derivative(const LinearMap& f, const Tensor& x, const Tensor& dx, double h) {
  const Tensor p1 = f(axpy(h, dx, x));
  const Tensor m1 = f(axpy(-h, dx, x));
  const Tensor p2 = f(axpy(2 * h, dx, x));
  const Tensor m2 = f(axpy(-2 * h, dx, x));
  Tensor out(p1.dims());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
  return out;
}

double dot_test(const LinearMap& jvp, const LinearMap& vjp, const Shape& in_dims, const Shape& out_dims,
                std::uint64_t seed) {
  const Tensor dx = randn(in_dims, seed);
  const Tensor y = randn(out_dims, seed + 1);
  const double lhs = dot(jvp(dx), y);
  const double rhs = dot(dx, vjp(y));
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace glayers
