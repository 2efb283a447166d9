#include "glayers/gaussianize/lambert.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "glayers/error.hpp"
#include "glayers/scalar_solvers.hpp"

namespace glayers::gauss {

namespace {

struct Moments {
  double mean, m2, m3, m4;
};

Moments central_moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  Moments m{mean, 0, 0, 0};
  for (double v : x) {
    const double d = v - mean, d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

std::vector<double> apply_w_delta(std::span<const double> u, double delta) {
  std::vector<double> y(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) y[i] = solvers::w_delta(u[i], delta);
  return y;
}

double kurtosis_gap(std::span<const double> u, double delta) {
  const std::vector<double> y = apply_w_delta(u, delta);
  return kurtosis(y) - 3.0;
}

void check_input(const Tensor& s) {
  if (s.size() < 8) fail(ErrorKind::Shape, "lambert: needs at least 8 samples");
  for (double v : s.values())
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "lambert: non-finite input");
}

}  // namespace

double kurtosis(std::span<const double> x) {
  const Moments m = central_moments(x);
  if (!(m.m2 > 0.0)) fail(ErrorKind::Variance, "kurtosis: zero variance");
  return m.m4 / (m.m2 * m.m2);
}

double heavy_tail(double u, double delta) { return u * std::exp(0.5 * delta * u * u); }

Tensor heavy_tail(const Tensor& u, double delta) {
  Tensor out(u.dims());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = heavy_tail(u[i], delta);
  return out;
}

double fit_delta(std::span<const double> u) {
  const double lo = std::log(kDeltaLo), hi = std::log(kDeltaHi);
  auto gap = [&](double t) { return kurtosis_gap(u, std::exp(t)); };
  if (gap(lo) <= 0.0) return kDeltaLo;
  if (gap(hi) >= 0.0) return kDeltaHi;
  return std::exp(solvers::brent_root(gap, {lo, hi}, 1e-13));
}

ad::Var delta_solve(ad::Var u) {
  const Tensor& uv = u.value();
  const double delta = fit_delta(uv.values());
  Tensor ddelta_du(uv.dims(), 0.0);
  if (delta > kDeltaLo && delta < kDeltaHi) {
    // Root condition K(W_delta(u)) = 3: d delta / du = -K_u / K_delta.
    const std::vector<double> y = apply_w_delta(uv.values(), delta);
    const Moments m = central_moments(y);
    const double n = static_cast<double>(y.size());
    double k_delta = 0.0;
    std::vector<double> k_y(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - m.mean;
      k_y[i] = (4.0 / n) * (d * d * d - m.m3) / (m.m2 * m.m2) -
               2.0 * m.m4 / (m.m2 * m.m2 * m.m2) * (2.0 / n) * d;
      k_delta += k_y[i] * solvers::w_delta_ddelta(y[i], delta);
    }
    if (!(std::abs(k_delta) > 0.0)) fail(ErrorKind::Numeric, "lambert: flat kurtosis in delta");
    for (std::size_t i = 0; i < y.size(); ++i)
      ddelta_du[i] = -k_y[i] * solvers::w_delta_du(y[i], delta) / k_delta;
  }
  return u.tape()->push(
      ad::OpKind::Custom, Tensor::scalar(delta), {u},
      [ddelta_du = std::move(ddelta_du)](const Tensor& g) {
        return std::vector<Tensor>{scaled(ddelta_du, g[0])};
      },
      "delta_solve");
}

ad::Var w_delta(ad::Var u, ad::Var delta) {
  const Tensor& uv = u.value();
  const double d = delta.value().item();
  Tensor y(uv.dims());
  Tensor dy_du(uv.dims()), dy_dd(uv.dims());
  for (std::size_t i = 0; i < uv.size(); ++i) {
    y[i] = solvers::w_delta(uv[i], d);
    dy_du[i] = solvers::w_delta_du(y[i], d);
    dy_dd[i] = solvers::w_delta_ddelta(y[i], d);
  }
  return u.tape()->push(
      ad::OpKind::Custom, std::move(y), {u, delta},
      [dy_du = std::move(dy_du), dy_dd = std::move(dy_dd)](const Tensor& g) {
        Tensor gu(g.dims());
        double gd = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          gu[i] = g[i] * dy_du[i];
          gd += g[i] * dy_dd[i];
        }
        return std::vector<Tensor>{std::move(gu), Tensor::scalar(gd)};
      },
      "w_delta");
}

LambertResult lambert_layer(ad::Var s, const LambertOptions& opt) {
  const Tensor& sv = s.value();
  check_input(sv);
  LambertResult res;
  if (kurtosis(sv.values()) <= 3.0) {
    res.output = s;
    res.skipped = true;
    return res;
  }

  ad::Var mu = ad::mean(s);
  ad::Var sigma = ad::sqrt(ad::variance(s, 0));
  ad::Var delta;
  double prev_delta = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  for (int k = 1; k <= opt.max_iter; ++k) {
    ad::Var u = ad::div(ad::sub(s, mu), sigma);
    delta = delta_solve(u);
    ad::Var x = ad::add(ad::mul(w_delta(u, delta), sigma), mu);
    ad::Var mu_next = ad::mean(x);
    ad::Var sigma_next = ad::sqrt(ad::variance(x, 0));

    const double dm = mu_next.value().item() - mu.value().item();
    const double ds = sigma_next.value().item() - sigma.value().item();
    const double dd = delta.value().item() - prev_delta;
    const double change = std::sqrt(dm * dm + ds * ds + dd * dd);
    if (!std::isfinite(mu_next.value().item()) || !std::isfinite(sigma_next.value().item()))
      fail(ErrorKind::Numeric, "lambert: non-finite IGMM iterate");
    mu = mu_next;
    sigma = sigma_next;
    prev_delta = delta.value().item();
    res.iterations = k;
    if (change < opt.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("lambert: IGMM did not converge in " + std::to_string(opt.max_iter) + " iterations",
                           prev_delta);

  ad::Var u = ad::div(ad::sub(s, mu), sigma);
  res.output = ad::add(ad::mul(w_delta(u, delta), sigma), mu);
  res.delta = delta.value().item();
  res.mu = mu.value().item();
  res.sigma = sigma.value().item();
  return res;
}

Tensor lambert_layer(const Tensor& s, const LambertOptions& opt) {
  ad::Tape t;
  return lambert_layer(t.constant(s), opt).output.value();
}

}  // namespace glayers::gauss
