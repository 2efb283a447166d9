#include "glayers/invert/gradcheck_registry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "glayers/autodiff.hpp"
#include "glayers/error.hpp"
#include "glayers/forward/eikonal.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/gaussianize/ica.hpp"
#include "glayers/gaussianize/lambert.hpp"
#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/gaussianize/standardize.hpp"
#include "glayers/gaussianize/whiten.hpp"
#include "glayers/gaussianize/yeo_johnson.hpp"
#include "glayers/invert/inversion.hpp"
#include "glayers/random.hpp"
#include "glayers/reparam/reparam.hpp"

namespace glayers::inv {

namespace {

using TapedOp = std::function<ad::Var(ad::Var)>;

// 1/2 ||op(x) - a||^2 and its tape gradient.
ValueAndGrad head(TapedOp op, Tensor a) {
  return [op = std::move(op), a = std::move(a)](const Tensor& x) {
    ad::Tape t;
    ad::Var in = t.leaf(x);
    ad::Var diff = ad::sub(op(in), t.constant(a));
    ad::Var f = ad::scale(ad::sum(ad::mul(diff, diff)), 0.5);
    return std::make_pair(f.value().item(), t.grad(f, in));
  };
}

// Correlated D x N patch matrix: a random mixing of independent rows.
Tensor mixed_rows(std::size_t d, std::size_t n, std::uint64_t seed) {
  const Tensor s = randn({d, n}, seed);
  const Tensor a = randn({d, d}, seed + 17);
  Tensor out({d, n}, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += (i == k ? 1.0 : 0.5 * a[i * d + k]) * s[k * n + j];
  return out;
}

// Whitened mixture of independent uniform sources (the input ICA sees inside the pipeline).
Tensor whitened_uniform(std::size_t d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  Tensor s({d, n});
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = u(rng);
  const Tensor a = randn({d, d}, seed + 3);
  Tensor x({d, n}, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < n; ++j) x[i * n + j] += a[i * d + k] * s[k * n + j];
  return gauss::zca_whiten(x, 1e-4);
}

GradcheckReport taylor(const std::string& id, const ValueAndGrad& fg, const Tensor& x, std::uint64_t seed) {
  GradcheckReport r;
  r.id = id;
  r.fd = fd_convergence_test(fg, x, seed);
  r.pass = r.fd.exact_to_roundoff || (r.fd.slope >= kMinSlope && r.fd.slope <= kMaxSlope);
  return r;
}

GradcheckReport objective_check(const std::string& id, ProblemKind problem, std::uint64_t seed) {
  InversionConfig cfg;
  cfg.problem = problem;
  cfg.reparam = ReparamKind::Glayers;
  cfg.truth_seed = seed + 100;
  cfg.noise_seed = seed + 200;
  const ProblemSetup s = make_problem(cfg);
  InversionObjective obj(cfg, s.model, s.data);
  return taylor(id, [&](const Tensor& x) { return obj(x); }, randn(obj.variable_dims(), seed), seed + 1);
}

GradcheckReport eikonal_check(std::uint64_t seed) {
  GradcheckReport r;
  r.id = "eikonal";
  r.adjoint = true;
  const auto g = fwd::EikonalGeometry::square();
  const Tensor c = fwd::velocity_map(fwd::toy_generator(randn({kLatentSide, kLatentSide}, seed)));
  const Tensor obs = fwd::traveltime_table(fwd::velocity_map(fwd::toy_generator(randn({kLatentSide, kLatentSide}, seed + 1))), g);
  auto chi = [&](const Tensor& cc) {
    const Tensor res = axpy(-1.0, obs, fwd::traveltime_table(cc, g));
    return 0.5 * dot(res, res);
  };
  const Tensor grad = fwd::traveltime_gradient(c, g, axpy(-1.0, obs, fwd::traveltime_table(c, g)));

  // Cells held fixed by the source initialization have no sensitivity; sample among the rest.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (grad[i] != 0.0) live.push_back(i);
  Rng rng(seed + 2);
  std::shuffle(live.begin(), live.end(), rng);
  constexpr double kStep = 1e-1;  // m/s on velocities in [1500, 1600]
  for (std::size_t k = 0; k < 5 && k < live.size(); ++k) {
    const std::size_t idx = live[k];
    Tensor cp = c, cm = c;
    cp[idx] += kStep;
    cm[idx] -= kStep;
    const double fd = (chi(cp) - chi(cm)) / (2.0 * kStep);
    const double rel = std::abs(fd - grad[idx]) / std::max({std::abs(fd), std::abs(grad[idx]), 1e-300});
    r.cell_rel_error.push_back(rel);
    r.max_rel_error = std::max(r.max_rel_error, rel);
  }
  r.pass = r.cell_rel_error.size() == 5 && r.max_rel_error <= kMaxAdjointRelError;
  return r;
}

using Runner = std::function<GradcheckReport(std::uint64_t)>;

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> reg = [] {
    std::map<std::string, Runner> m;
    m["zca"] = [](std::uint64_t s) {
      return taylor("zca", head([](ad::Var v) { return gauss::zca_whiten(v, 1e-4); }, randn({4, 64}, s + 1)),
                    mixed_rows(4, 64, s), s + 2);
    };
    m["iter"] = [](std::uint64_t s) {
      return taylor("iter",
                    head([](ad::Var v) { return gauss::iterative_whiten(v, 1e-4, 1e-10, 100); }, randn({4, 64}, s + 1)),
                    mixed_rows(4, 64, s), s + 2);
    };
    m["ica"] = [](std::uint64_t s) {
      return taylor("ica", head([](ad::Var v) { return gauss::ica_layer(v).output; }, randn({4, 256}, s + 1)),
                    whitened_uniform(4, 256, s), s + 2);
    };
    m["yeo_johnson"] = [](std::uint64_t s) {
      Tensor x = randn({256}, s);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(0.6 * x[i]) - 1.0;
      return taylor("yeo_johnson", head([](ad::Var v) { return gauss::yeo_johnson_layer(v).output; }, randn({256}, s + 1)),
                    x, s + 2);
    };
    m["lambert"] = [](std::uint64_t s) {
      return taylor("lambert", head([](ad::Var v) { return gauss::lambert_layer(v).output; }, randn({256}, s + 1)),
                    gauss::heavy_tail(randn({256}, s), 0.3), s + 2);
    };
    m["standardize"] = [](std::uint64_t s) {
      return taylor("standardize", head([](ad::Var v) { return gauss::standardize(v, 1.0); }, randn({64}, s + 1)),
                    randn({64}, s), s + 2);
    };
    m["spherical"] = [](std::uint64_t s) {
      return taylor("spherical", head([](ad::Var v) { return reparam::spherical(v, 1.0); }, randn({16, 16}, s + 1)),
                    randn({16, 16}, s), s + 2);
    };
    m["cayley"] = [](std::uint64_t s) {
      return taylor("cayley", head([](ad::Var t) { return reparam::cayley(t, 4); }, randn({4, 4}, s + 1)),
                    randn({reparam::skew_param_count(4)}, s), s + 2);
    };
    m["generator"] = [](std::uint64_t s) {
      const Tensor a = randn({4 * kLatentSide, 4 * kLatentSide}, s + 1);
      ValueAndGrad fg = [a](const Tensor& z) {
        const Tensor r = axpy(-1.0, a, fwd::toy_generator(z));
        return std::make_pair(0.5 * dot(r, r), fwd::toy_generator_vjp(z, r));
      };
      return taylor("generator", fg, randn({kLatentSide, kLatentSide}, s), s + 2);
    };
    m["pipeline"] = [](std::uint64_t s) {
      const gauss::PatchPartition p({kLatentSide, kLatentSide}, {2, 2});
      const gauss::GaussianizeConfig cfg;
      return taylor("pipeline",
                    head([p, cfg](ad::Var v) { return gauss::gaussianize(v, p, cfg).output; },
                         randn({kLatentSide, kLatentSide}, s + 1)),
                    gauss::heavy_tail(randn({kLatentSide, kLatentSide}, s), 0.3), s + 2);
    };
    m["deblur"] = [](std::uint64_t s) { return objective_check("deblur", ProblemKind::Deblur, s); };
    m["csmri"] = [](std::uint64_t s) { return objective_check("csmri", ProblemKind::Csmri, s); };
    m["eikonal"] = [](std::uint64_t s) { return eikonal_check(s); };
    return m;
  }();
  return reg;
}

}  // namespace

const std::vector<std::string>& gradcheck_ids() {
  static const std::vector<std::string> ids{"zca", "iter", "ica", "yeo_johnson", "lambert", "standardize", "spherical",
                                            "cayley", "generator", "pipeline", "deblur", "csmri", "eikonal"};
  return ids;
}

bool is_gradcheck_id(const std::string& id) { return registry().count(id) > 0; }

GradcheckReport run_gradcheck(const std::string& id, std::uint64_t seed) {
  const auto it = registry().find(id);
  if (it == registry().end()) {
    std::string known;
    for (const auto& k : gradcheck_ids()) known += " " + k;
    fail(ErrorKind::Config, "unknown gradcheck id '" + id + "' (known:" + known + ")");
  }
  const auto t0 = std::chrono::steady_clock::now();
  GradcheckReport r = it->second(seed);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string GradcheckReport::table() const {
  std::ostringstream os;
  os.precision(6);
  os << "id " << id << "\n";
  if (adjoint) {
    os << "cell  rel_error (adjoint vs central FD)\n";
    for (std::size_t i = 0; i < cell_rel_error.size(); ++i) os << i << "  " << cell_rel_error[i] << "\n";
    os << "max_rel_error " << max_rel_error << " (limit " << kMaxAdjointRelError << ")\n";
  } else {
    os << "eps  error\n";
    for (std::size_t i = 0; i < fd.eps.size(); ++i) os << fd.eps[i] << "  " << fd.error[i] << "\n";
    os << "slope " << fd.slope << (fd.exact_to_roundoff ? " (linear: exact to roundoff)" : "") << " (accept ["
       << kMinSlope << ", " << kMaxSlope << "])\n";
  }
  os << (pass ? "PASS" : "FAIL") << " " << seconds << " s\n";
  return os.str();
}

}  // namespace glayers::inv
