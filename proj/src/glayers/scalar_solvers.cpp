#include "glayers/scalar_solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "glayers/error.hpp"

namespace glayers::solvers {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_bracket(Bracket b, const char* who) {
  if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
    fail(ErrorKind::Bracket, std::string(who) + ": invalid bracket [" + std::to_string(b.lo) + ", " +
                                 std::to_string(b.hi) + "]");
}

double eval(const ScalarFn& f, double x, const char* who) {
  const double v = f(x);
  if (!std::isfinite(v))
    fail(ErrorKind::Evaluation, std::string(who) + ": non-finite value at x=" + std::to_string(x));
  return v;
}

}  // namespace

double brent_minimize(const ScalarFn& f, Bracket b, double tol, int max_iter) {
  check_bracket(b, "brent_minimize");
  if (!(tol > 0.0)) fail(ErrorKind::Domain, "brent_minimize: tol must be positive");

  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = b.lo, c = b.hi;
  double x = a + golden * (c - a);
  double w = x, v = x;
  double fx = eval(f, x, "brent_minimize");
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + c);
    const double tol1 = 2.0 * kEps * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (c - a)) {
      converged = true;
      break;
    }
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      // Parabola through (v, fv), (w, fw), (x, fx).
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (c - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || c - u < tol2) d = (xm >= x) ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : c - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = eval(f, u, "brent_minimize");
    if (fu <= fx) {
      if (u >= x) a = x; else c = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else c = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  // Never worse than the bracket ends.
  const double flo = eval(f, b.lo, "brent_minimize");
  const double fhi = eval(f, b.hi, "brent_minimize");
  double best = x, fbest = fx;
  if (flo < fbest) { best = b.lo; fbest = flo; }
  if (fhi < fbest) { best = b.hi; fbest = fhi; }
  if (!converged)
    throw ConvergenceError("brent_minimize: no convergence in " + std::to_string(max_iter) + " iterations",
                           best);
  return best;
}

double brent_root(const ScalarFn& g, Bracket br, double tol, int max_iter) {
  check_bracket(br, "brent_root");
  if (tol < 0.0) fail(ErrorKind::Domain, "brent_root: tol must be non-negative");

  double a = br.lo, b = br.hi;
  double fa = eval(g, a, "brent_root");
  double fb = eval(g, b, "brent_root");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    fail(ErrorKind::Bracket, "brent_root: no sign change on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || (tol > 0.0 && std::abs(fb) <= tol)) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // Secant or inverse quadratic interpolation.
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = eval(g, b, "brent_root");
  }
  throw ConvergenceError("brent_root: no convergence in " + std::to_string(max_iter) + " iterations", b);
}

double lambert_w0(double q) {
  constexpr double kBranch = -0.36787944117144233;  // -1/e
  if (std::isnan(q)) fail(ErrorKind::Domain, "lambert_w0: NaN argument");
  if (q < kBranch - 4.0 * kEps) fail(ErrorKind::Domain, "lambert_w0: argument below -1/e");
  if (q <= kBranch) return -1.0;
  if (q == 0.0) return 0.0;
  if (std::isinf(q)) return q;

  double t;
  if (q >= -0.25) {
    t = std::log1p(q);
  } else {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::exp(1.0) * q + 1.0));
    t = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
  }
  for (int iter = 0; iter < 64; ++iter) {
    const double et = std::exp(t);
    const double fval = t * et - q;
    const double tp1 = t + 1.0;
    if (tp1 == 0.0) break;
    const double denom = et * tp1 - 0.5 * (t + 2.0) * fval / tp1;
    const double step = fval / denom;
    t -= step;
    if (std::abs(step) <= 4.0 * kEps * (1.0 + std::abs(t))) break;
  }
  return t;
}

double w_delta(double u, double delta) {
  if (!(delta >= 0.0)) fail(ErrorKind::Domain, "w_delta: delta must be non-negative");
  if (delta == 0.0 || u == 0.0) return u;
  const double r = std::sqrt(lambert_w0(delta * u * u) / delta);
  return u > 0.0 ? r : -r;
}

}  // namespace glayers::solvers
