#include "glayers/optimize/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "glayers/error.hpp"

namespace glayers::opt {

void LbfgsConfig::validate() const {
  if (memory < 0) fail(ErrorKind::Config, "lbfgs: memory must be non-negative");
  if (max_iter < 0) fail(ErrorKind::Config, "lbfgs: max_iter must be non-negative");
  if (!(grad_tol >= 0.0)) fail(ErrorKind::Config, "lbfgs: grad_tol must be non-negative");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) fail(ErrorKind::Config, "lbfgs: need 0 < c1 < c2 < 1");
  if (max_linesearch < 1) fail(ErrorKind::Config, "lbfgs: max_linesearch must be positive");
}

namespace {

struct Point {
  double alpha, loss, slope;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept inside the safeguarded interval.
double interpolate(const Point& a, const Point& b) {
  const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
  const double margin = 0.1 * (hi - lo);
  const double d1 = a.slope + b.slope - 3.0 * (a.loss - b.loss) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    if (std::isfinite(cand)) t = cand;
  }
  return std::clamp(t, lo + margin, hi - margin);
}

}  // namespace

LineSearchResult strong_wolfe(const ValueAndGrad& f, const Tensor& x, double f0, const Tensor& g0, const Tensor& d,
                              double alpha0, double c1, double c2, int max_evals) {
  LineSearchResult res;
  const double slope0 = dot(g0, d);
  if (!(slope0 < 0.0)) return res;

  auto eval = [&](double alpha, Point& p, LineSearchResult& at) {
    at.x = axpy(alpha, d, x);
    auto [loss, grad] = f(at.x);
    ++res.evaluations;
    at.loss = loss;
    at.grad = std::move(grad);
    at.alpha = alpha;
    p = {alpha, loss, dot(at.grad, d)};
    return std::isfinite(loss) && std::isfinite(p.slope);
  };
  auto accept = [&](LineSearchResult& at) {
    const int evals = res.evaluations;
    res = std::move(at);
    res.ok = true;
    res.evaluations = evals;
    return res;
  };

  Point prev{0.0, f0, slope0};
  Point lo{}, hi{};
  double alpha = alpha0;
  bool bracketed = false;
  while (res.evaluations < max_evals) {
    LineSearchResult at;
    Point p{};
    if (!eval(alpha, p, at)) {
      // Overshot into a non-finite region: shrink toward the last good point.
      alpha = 0.5 * (prev.alpha + alpha);
      continue;
    }
    if (p.loss > f0 + c1 * alpha * slope0 || (prev.alpha > 0.0 && p.loss >= prev.loss)) {
      lo = prev;
      hi = p;
      bracketed = true;
      break;
    }
    if (std::abs(p.slope) <= -c2 * slope0) return accept(at);
    if (p.slope >= 0.0) {
      lo = p;
      hi = prev;
      bracketed = true;
      break;
    }
    prev = p;
    alpha *= 2.0;
  }
  if (!bracketed) return res;

  while (res.evaluations < max_evals) {
    const double a = interpolate(lo, hi);
    LineSearchResult at;
    Point p{};
    if (!eval(a, p, at)) {
      hi = {a, HUGE_VAL, 0.0};
      continue;
    }
    if (p.loss > f0 + c1 * a * slope0 || p.loss >= lo.loss) {
      hi = p;
    } else {
      if (std::abs(p.slope) <= -c2 * slope0) return accept(at);
      if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = p;
    }
    if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
  }
  return res;
}

LbfgsResult lbfgs(const ValueAndGrad& f, const Tensor& x0, const LbfgsConfig& cfg) {
  cfg.validate();
  LbfgsResult res;
  auto [f0, g0] = f(x0);
  if (!std::isfinite(f0)) fail(ErrorKind::Numeric, "lbfgs: loss is not finite at the starting point");
  res.x = x0;
  res.loss = f0;
  res.grad = std::move(g0);
  res.initial_loss = f0;
  res.evaluations = 1;

  std::deque<std::pair<Tensor, Tensor>> pairs;  // (s, y)
  std::deque<double> rho;
  bool retried = false;
  res.status = "max_iter";
  for (int k = 0; k < cfg.max_iter; ++k) {
    const double gnorm = norm2(res.grad);
    if (gnorm <= cfg.grad_tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    // Two-loop recursion.
    Tensor q = res.grad;
    std::vector<double> a(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
      a[i] = rho[i] * dot(pairs[i].first, q);
      q = axpy(-a[i], pairs[i].second, q);
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      q = scaled(q, dot(s, y) / dot(y, y));
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double b = rho[i] * dot(pairs[i].second, q);
      q = axpy(a[i] - b, pairs[i].first, q);
    }
    Tensor d = scaled(q, -1.0);
    const double alpha0 = pairs.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

    LineSearchResult ls = strong_wolfe(f, res.x, res.loss, res.grad, d, alpha0, cfg.c1, cfg.c2, cfg.max_linesearch);
    res.evaluations += ls.evaluations;
    if (!ls.ok) {
      if (!retried && !pairs.empty()) {
        retried = true;
        pairs.clear();
        rho.clear();
        ++res.restarts;
        --k;
        continue;
      }
      res.status = "line_search_failed";
      break;
    }
    retried = false;

    IterationRecord rec;
    rec.iteration = k + 1;
    rec.loss_before = res.loss;
    rec.slope_before = dot(res.grad, d);
    rec.slope_after = dot(ls.grad, d);
    rec.step = ls.alpha;
    rec.loss = ls.loss;
    rec.grad_norm = norm2(ls.grad);
    rec.evaluations = ls.evaluations;

    Tensor s = axpy(-1.0, res.x, ls.x);
    Tensor y = axpy(-1.0, res.grad, ls.grad);
    const double sy = dot(s, y);
    if (cfg.memory > 0 && sy > 1e-10 * norm2(s) * norm2(y)) {
      pairs.emplace_back(std::move(s), std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(pairs.size()) > cfg.memory) {
        pairs.pop_front();
        rho.pop_front();
      }
    }
    res.x = std::move(ls.x);
    res.loss = ls.loss;
    res.grad = std::move(ls.grad);
    res.iterations = k + 1;
    res.trace.push_back(rec);
  }
  if (!res.converged && norm2(res.grad) <= cfg.grad_tol) {
    res.converged = true;
    res.status = "converged";
  }
  return res;
}

AdamResult adam(const ValueAndGrad& f, const Tensor& x0, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) fail(ErrorKind::Config, "adam: learning rate must be positive");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    fail(ErrorKind::Config, "adam: betas must lie in [0, 1)");
  AdamResult res;
  res.x = x0;
  Tensor m(x0.dims(), 0.0), v(x0.dims(), 0.0);
  double b1t = 1.0, b2t = 1.0;
  for (int t = 1; t <= cfg.steps; ++t) {
    auto [loss, g] = f(res.x);
    res.losses.push_back(loss);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / (1.0 - b1t), vh = v[i] / (1.0 - b2t);
      res.x[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
  res.losses.push_back(f(res.x).first);
  return res;
}

}  // namespace glayers::opt
