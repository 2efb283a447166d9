#include "glayers/gaussianize/yeo_johnson.hpp"

#include <cmath>
#include <string>

#include "glayers/error.hpp"
#include "glayers/scalar_solvers.hpp"

namespace glayers::gauss {

namespace {

// E(x) = expm1(x) / x and its first two derivatives, stable through x = 0.
struct ExpRatio {
  double e0, e1, e2;
};

ExpRatio exp_ratio(double x) {
  if (std::abs(x) < 0.5) {
    // Power series: E = sum x^k / (k+1)!.
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    double xk = 1.0;  // x^k
    double fact = 1.0;  // (k+1)!
    double xkm1 = 0.0, xkm2 = 0.0;
    for (int k = 0; k < 24; ++k) {
      fact *= (k + 1);
      e0 += xk / fact;
      if (k >= 1) e1 += k * xkm1 / fact;
      if (k >= 2) e2 += k * (k - 1) * xkm2 / fact;
      xkm2 = xkm1;
      xkm1 = xk;
      xk *= x;
    }
    return {e0, e1, e2};
  }
  const double ex = std::exp(x);
  const double em1 = std::expm1(x);
  return {em1 / x, (ex * (x - 1.0) + 1.0) / (x * x), (ex * (x * x - 2.0 * x + 2.0) - 2.0) / (x * x * x)};
}

struct ScoreTerms {
  double mean_s = 0, var = 0, a = 0, c = 0, mean_t = 0;
};

ScoreTerms score_terms(std::span<const double> p, double lambda, std::vector<YeoJohnsonPartials>* keep) {
  ScoreTerms st;
  const double n = static_cast<double>(p.size());
  std::vector<YeoJohnsonPartials> local;
  auto& parts = keep ? *keep : local;
  parts.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    parts[i] = yeo_johnson_partials(p[i], lambda);
    st.mean_s += parts[i].s;
    st.mean_t += parts[i].ds_dl;
    st.c += std::copysign(std::log1p(std::abs(p[i])), p[i]) * (p[i] == 0.0 ? 0.0 : 1.0);
  }
  st.mean_s /= n;
  st.mean_t /= n;
  for (const auto& q : parts) {
    const double ds = q.s - st.mean_s;
    st.var += ds * ds;
    st.a += ds * q.ds_dl;
  }
  st.var /= n;
  return st;
}

void check_samples(std::span<const double> p, std::size_t min_n) {
  if (p.size() < min_n)
    fail(ErrorKind::Shape, "yeo-johnson: needs at least " + std::to_string(min_n) + " samples");
  bool constant = true;
  for (double x : p) {
    if (!std::isfinite(x)) fail(ErrorKind::Numeric, "yeo-johnson: non-finite input");
    if (x != p[0]) constant = false;
  }
  if (constant) fail(ErrorKind::Variance, "yeo-johnson: constant input has zero variance");
}

}  // namespace

YeoJohnsonPartials yeo_johnson_partials(double p, double lambda) {
  if (p >= 0.0) {
    const double a = std::log1p(p);
    const ExpRatio e = exp_ratio(lambda * a);
    const double dsdp = std::exp((lambda - 1.0) * a);
    return {a * e.e0, a * a * e.e1, a * a * a * e.e2, dsdp, a * dsdp};
  }
  const double b = std::log1p(-p);
  const ExpRatio e = exp_ratio((2.0 - lambda) * b);
  const double dsdp = std::exp((1.0 - lambda) * b);
  return {-b * e.e0, b * b * e.e1, -b * b * b * e.e2, dsdp, -b * dsdp};
}

double yeo_johnson(double p, double lambda) { return yeo_johnson_partials(p, lambda).s; }

Tensor yeo_johnson(const Tensor& p, double lambda) {
  Tensor out(p.dims());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = yeo_johnson(p[i], lambda);
  return out;
}

double yeo_johnson_loglik(std::span<const double> p, double lambda) {
  const ScoreTerms st = score_terms(p, lambda, nullptr);
  const double n = static_cast<double>(p.size());
  return -0.5 * n * std::log(st.var) + (lambda - 1.0) * st.c;
}

double yeo_johnson_score(std::span<const double> p, double lambda) {
  const ScoreTerms st = score_terms(p, lambda, nullptr);
  return -st.a / st.var + st.c;
}

double fit_yeo_johnson_lambda(std::span<const double> p) {
  check_samples(p, 3);
  const double lambda0 = solvers::brent_minimize([&](double l) { return -yeo_johnson_loglik(p, l); },
                                                 {kLambdaLo, kLambdaHi});
  auto score = [&](double l) { return yeo_johnson_score(p, l); };
  const double g0 = score(lambda0);
  if (g0 == 0.0) return lambda0;

  // Expand a bracket around the Brent estimate until the score changes sign (positive below).
  double step = 1e-3;
  double lo = lambda0, hi = lambda0;
  for (int i = 0; i < 64; ++i) {
    lo = std::max(kLambdaLo, lambda0 - step);
    hi = std::min(kLambdaHi, lambda0 + step);
    if (score(lo) > 0.0 && score(hi) < 0.0) {
      return solvers::brent_root(score, {lo, hi}, 0.0);
    }
    if (lo == kLambdaLo && hi == kLambdaHi) break;
    step *= 2.0;
  }
  throw ConvergenceError("yeo-johnson: likelihood maximum lies outside [-5, 5]", lambda0);
}

YeoJohnsonResult yeo_johnson_layer(ad::Var p) {
  const Tensor pv = p.value();
  check_samples(pv.values(), kMinLayerSamples);
  const double lambda = fit_yeo_johnson_lambda(pv.values());

  std::vector<YeoJohnsonPartials> parts;
  const ScoreTerms st = score_terms(pv.values(), lambda, &parts);
  Tensor out(pv.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = parts[i].s;

  const double n = static_cast<double>(pv.size());
  // Second derivatives of the likelihood: L_lambda and L_p (L = score).
  double a_l = 0.0;
  for (const auto& q : parts) a_l += (q.ds_dl - st.mean_t) * q.ds_dl + (q.s - st.mean_s) * q.d2s_dl2;
  const double var_l = 2.0 * st.a / n;
  const double l_lambda = -(a_l * st.var - st.a * var_l) / (st.var * st.var);
  if (!(std::abs(l_lambda) > 0.0) || !std::isfinite(l_lambda))
    fail(ErrorKind::Numeric, "yeo-johnson: singular likelihood curvature");
  Tensor l_p(pv.dims());
  for (std::size_t k = 0; k < pv.size(); ++k) {
    const auto& q = parts[k];
    const double a_pk = q.ds_dp * (q.ds_dl - st.mean_t) + (q.s - st.mean_s) * q.d2s_dldp;
    const double var_pk = 2.0 / n * (q.s - st.mean_s) * q.ds_dp;
    l_p[k] = -(a_pk * st.var - st.a * var_pk) / (st.var * st.var) + 1.0 / (1.0 + std::abs(pv[k]));
  }

  ad::Var s = p.tape()->push(
      ad::OpKind::Custom, std::move(out), {p},
      [parts = std::move(parts), l_p = std::move(l_p), l_lambda](const Tensor& g) {
        double g_lambda = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) g_lambda += g[i] * parts[i].ds_dl;
        const double k = -g_lambda / l_lambda;
        Tensor gp(g.dims());
        for (std::size_t i = 0; i < g.size(); ++i) gp[i] = g[i] * parts[i].ds_dp + k * l_p[i];
        return std::vector<Tensor>{std::move(gp)};
      },
      "yeo_johnson");
  return {s, lambda};
}

Tensor yeo_johnson_layer(const Tensor& p) {
  ad::Tape t;
  return yeo_johnson_layer(t.constant(p)).output.value();
}

}  // namespace glayers::gauss
