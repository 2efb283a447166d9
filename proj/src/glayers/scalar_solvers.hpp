#pragma once

#include <cmath>
#include <functional>

namespace glayers::solvers {

/// Closed search interval; lo < hi, both finite.
struct Bracket {
  double lo;
  double hi;
};

using ScalarFn = std::function<double(double)>;

constexpr double kDefaultTol = 1e-10;
constexpr int kDefaultMaxIter = 200;

/// Brent minimization on [lo, hi] (golden section with parabolic steps). The endpoints are
/// evaluated too, so the result is never worse than either end. Throws ConvergenceError with the
/// best iterate when max_iter runs out.
double brent_minimize(const ScalarFn& f, Bracket b, double tol = kDefaultTol,
                      int max_iter = kDefaultMaxIter);

/// Brent root finding (zeroin). Needs g(lo)*g(hi) <= 0. tol = 0 iterates to machine precision.
double brent_root(const ScalarFn& g, Bracket b, double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

/// Principal branch of Lambert W by Halley iteration.
double lambert_w0(double q);

/// Inverse of the heavy-tail map u -> u*exp(delta/2*u^2); identity for delta == 0.
double w_delta(double u, double delta);

/// d w_delta / du, evaluated from the output y = w_delta(u, delta).
inline double w_delta_du(double y, double delta) {
  const double y2 = y * y;
  return std::exp(-0.5 * delta * y2) / (1.0 + delta * y2);
}

/// d w_delta / d delta, evaluated from the output y.
inline double w_delta_ddelta(double y, double delta) {
  const double y2 = y * y;
  return -0.5 * y2 * y / (1.0 + delta * y2);
}

}  // namespace glayers::solvers
