#include <cmath>
#include <limits>
#include <vector>

#include "support.hpp"

#include "glayers/gaussianize/yeo_johnson.hpp"
#include "glayers/scalar_solvers.hpp"

using namespace glayers;
using namespace glayers::solvers;

namespace {

const std::vector<double> kSkewed{0.0, 0.1, 0.2, 0.5, 5.0};

// Grid search over [-5, 5] with step 1e-4.
double grid_lambda(const std::vector<double>& x) {
  double best = -5.0, best_ll = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100000; ++k) {
    const double l = -5.0 + 1e-4 * k;
    const double ll = gauss::yeo_johnson_loglik(x, l);
    if (ll > best_ll) best_ll = ll, best = l;
  }
  return best;
}

}  // namespace

TEST_SUITE("scalar-solvers") {

TEST_CASE("brent_minimize finds analytic minima") {
  CHECK(brent_minimize([](double x) { return (x - 2) * (x - 2); }, {0, 5}) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(brent_minimize([](double x) { return std::abs(x); }, {-1, 3})) < 1e-8);
}

TEST_CASE("brent_minimize on the Yeo-Johnson likelihood agrees with a grid search") {
  const double l = brent_minimize([](double x) { return -gauss::yeo_johnson_loglik(kSkewed, x); }, {-5, 5});
  CHECK(l < 1.0);
  CHECK(std::abs(l - grid_lambda(kSkewed)) < 2e-4);
}

TEST_CASE("brent_minimize never returns worse than an endpoint") {
  prop::for_all(50, 11, [](prop::Gen& g) {
    const double a = g.uniform(-3, 3), c = g.uniform(-2, 2);
    auto f = [&](double x) { return std::sin(3 * x + c) + 0.1 * (x - a) * (x - a); };
    const double lo = g.uniform(-4, 0), hi = lo + g.uniform(0.5, 5);
    const double x = brent_minimize(f, {lo, hi});
    CHECK(x >= lo);
    CHECK(x <= hi);
    CHECK(f(x) <= std::min(f(lo), f(hi)));
  });
}

TEST_CASE("brent_minimize errors") {
  CHECK_ERROR_KIND(brent_minimize([](double) { return std::nan(""); }, {0, 1}), ErrorKind::Evaluation);
  CHECK_ERROR_KIND(brent_minimize([](double x) { return x; }, {1, 0}), ErrorKind::Bracket);
  try {
    brent_minimize([](double x) { return std::cos(x); }, {0, 6}, 1e-14, 2);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.best()));
  }
}

TEST_CASE("brent_root examples") {
  CHECK(brent_root([](double x) { return x * x - 4; }, {0, 5}) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(brent_root([](double x) { return x; }, {-1, 1})) < 1e-10);
  CHECK_ERROR_KIND(brent_root([](double x) { return x * x + 1; }, {-1, 1}), ErrorKind::Bracket);
}

TEST_CASE("brent_root polishes the Yeo-Johnson score to 1e-10") {
  const double l = gauss::fit_yeo_johnson_lambda(kSkewed);
  CHECK(std::abs(gauss::yeo_johnson_score(kSkewed, l)) <= 1e-10);
  // Score is the derivative of the log-likelihood: compare with central differences at the grid optimum.
  const double lg = grid_lambda(kSkewed), h = 1e-5;
  const double fd = (gauss::yeo_johnson_loglik(kSkewed, lg + h) - gauss::yeo_johnson_loglik(kSkewed, lg - h)) / (2 * h);
  CHECK(std::abs(fd - gauss::yeo_johnson_score(kSkewed, lg)) < 1e-6);
  CHECK(std::abs(l - lg) < 2e-4);
}

TEST_CASE("brent_root stays inside the bracket") {
  prop::for_all(100, 12, [](prop::Gen& g) {
    const double r = g.uniform(-5, 5), lo = r - g.uniform(0.01, 3), hi = r + g.uniform(0.01, 3);
    const double k = g.uniform(0.5, 3);
    const double x = brent_root([&](double t) { return std::tanh(k * (t - r)) + 0.1 * (t - r); }, {lo, hi});
    CHECK(x >= lo);
    CHECK(x <= hi);
    CHECK(std::abs(x - r) < 1e-9);
  });
}

TEST_CASE("lambert_w0 examples") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-14));
  CHECK(lambert_w0(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK_ERROR_KIND(lambert_w0(-0.5), ErrorKind::Domain);
}

TEST_CASE("lambert_w0 round trip on a log grid") {
  for (double lq = -6; lq <= 6; lq += 0.05) {
    const double q = std::pow(10.0, lq);
    const double w = lambert_w0(q);
    INFO("q = " << q);
    CHECK(std::abs(w * std::exp(w) - q) / q <= 1e-10);
    CHECK(w >= -1.0);
  }
}

TEST_CASE("w_delta examples") {
  CHECK(w_delta(0.8, 0.0) == 0.8);
  CHECK(w_delta(0.0, 2.0) == 0.0);
  CHECK(w_delta(std::sqrt(std::exp(1.0)), 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_ERROR_KIND(w_delta(1.0, -0.1), ErrorKind::Domain);
}

TEST_CASE("w_delta inverts the heavy-tail map, is odd and monotone") {
  prop::for_all(200, 13, [](prop::Gen& g) {
    const double u = g.uniform(-30, 30), delta = g.log_uniform(1e-6, 5);
    const double s = w_delta(u, delta);
    CHECK(prop::rel_diff(s * std::exp(0.5 * delta * s * s), u) <= 1e-9);
    CHECK(w_delta(-u, delta) == -s);
    const double u2 = u + g.uniform(1e-3, 1);
    CHECK(w_delta(u2, delta) > s);
  });
}

TEST_CASE("w_delta derivatives match finite differences") {
  prop::for_all(50, 14, [](prop::Gen& g) {
    const double u = g.uniform(-4, 4), d = g.uniform(0.05, 1.5), h = 1e-6;
    const double y = w_delta(u, d);
    CHECK(prop::rel_diff((w_delta(u + h, d) - w_delta(u - h, d)) / (2 * h), w_delta_du(y, d)) < 1e-6);
    if (std::abs(u) > 0.1)
      CHECK(prop::rel_diff((w_delta(u, d + h) - w_delta(u, d - h)) / (2 * h), w_delta_ddelta(y, d)) < 1e-6);
  });
}

}
