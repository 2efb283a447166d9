// Acceptance run: one PASS/FAIL line per primary criterion, with the measurements behind it.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "../unit/scenarios.hpp"
#include "glayers/autodiff.hpp"
#include "glayers/forward/eikonal.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/gaussianize/diagnostics.hpp"
#include "glayers/gaussianize/ica.hpp"
#include "glayers/gaussianize/lambert.hpp"
#include "glayers/gaussianize/partition.hpp"
#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/gaussianize/standardize.hpp"
#include "glayers/gaussianize/whiten.hpp"
#include "glayers/gaussianize/yeo_johnson.hpp"
#include "glayers/gradcheck.hpp"
#include "glayers/invert/gradcheck_registry.hpp"
#include "glayers/invert/inversion.hpp"
#include "glayers/random.hpp"
#include "glayers/reparam/reparam.hpp"

using namespace glayers;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failed = 0;

void verdict(bool ok, const char* name, const std::string& summary) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name, summary.c_str());
  std::fflush(stdout);
  if (!ok) ++failed;
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

template <typename... A>
void note(const char* f, A... a) {
  std::printf("      %s\n", fmt(f, a...).c_str());
}

// ---------------------------------------------------------------------------------------------

void gradient_fidelity() {
  const auto t0 = Clock::now();
  int pass = 0;
  const auto& ids = inv::gradcheck_ids();
  for (const std::string& id : ids) {
    const auto r = inv::run_gradcheck(id, 1);
    pass += r.pass;
    if (r.adjoint)
      note("%-12s adjoint vs FD max rel error %.2e  %s (%.1fs)", id.c_str(), r.max_rel_error, r.pass ? "ok" : "FAIL",
           r.seconds);
    else
      note("%-12s slope %.3f%s  %s (%.1fs)", id.c_str(), r.fd.slope, r.fd.exact_to_roundoff ? " (exact to roundoff)" : "",
           r.pass ? "ok" : "FAIL", r.seconds);
  }
  const double s = seconds_since(t0);
  verdict(pass == int(ids.size()) && s < 120.0, "gradient fidelity",
          fmt("%d/%zu checks in [1.8, 2.2] or adjoint <= 1e-4, %.1fs (budget 120s)", pass, ids.size(), s));
}

// ---------------------------------------------------------------------------------------------

void gaussianization_efficacy() {
  const auto t0 = Clock::now();
  const Shape dims{3, 64, 64};
  const gauss::PatchPartition p(dims, {1, 4, 4});
  gauss::GaussianizeConfig cfg;
  cfg.roll = true;
  const gauss::PatchPartition diag_p = gauss::final_partition(p, cfg);
  struct Scenario {
    const char* name;
    std::function<Tensor(std::uint64_t)> draw;
  };
  const std::vector<Scenario> scenarios{
      {"(a) log-gamma", [&](std::uint64_t s) { return scen::log_gamma(dims, s); }},
      {"(b) heavy tail d=0.5", [&](std::uint64_t s) { return scen::heavy(dims, 0.5, s); }},
      {"(c) Gaussian + sin cos", [&](std::uint64_t s) { return scen::planar(dims, s); }},
  };
  bool ok = true;
  auto run = [&](const char* name, const std::function<gauss::GaussianityDiagnostics(std::uint64_t)>& diag) {
    int pass = 0, fs = 0, fk = 0, fc = 0, fn = 0;
    double ws = 0, wk = 0, wc = 0, wn = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const auto d = diag(1000 + s);
      const auto g = gauss::gates(d, 1.0);
      pass += g.all();
      fs += !g.skewness, fk += !g.kurtosis, fc += !g.correlation, fn += !g.norm;
      ws = std::max(ws, std::abs(d.mean_skewness));
      wk = std::max(wk, std::abs(d.mean_excess_kurtosis));
      wc = std::max(wc, d.max_offdiag_correlation);
      wn = std::max(wn, std::abs(d.norm_ratio - 1.0));
    }
    note("%-24s %2d/20 pass (gate misses skew %d kurt %d corr %d norm %d); worst |G1| %.3f |G2| %.3f corr %.3f "
         "|norm-1| %.4f",
         name, pass, fs, fk, fc, fn, ws, wk, wc, wn);
    return pass;
  };
  for (const auto& sc : scenarios)
    ok &= run(sc.name, [&](std::uint64_t s) { return gauss::diagnostics(gauss::gaussianize(sc.draw(s), p, cfg), diag_p); }) >= 19;
  // Threshold sanity: direct standard-Gaussian draws, no pipeline, same partition and gates.
  ok &= run("baseline N(0, I) draws", [&](std::uint64_t s) { return gauss::diagnostics(randn(dims, s), diag_p); }) >= 19;
  const double secs = seconds_since(t0);
  note("3 x 64 x 64 tensors, 1 x 4 x 4 patches, second pass on the half-patch rolled partition; %.1fs", secs);
  verdict(ok && secs < 60.0, "gaussianization efficacy",
          fmt(">= 19/20 per scenario and for the Gaussian baseline, %.1fs (budget 60s)", secs));
}

// ---------------------------------------------------------------------------------------------

void igmm_contract() {
  bool ok = true;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Tensor u = scen::heavy({4096}, 0.3, 500 + s);
    ad::Tape t;
    const auto r = gauss::lambert_layer(t.constant(u));
    const double k = gauss::kurtosis(r.output.value().values());
    const bool this_ok = !r.skipped && r.delta >= 0.2 && r.delta <= 0.4 && std::abs(k - 3.0) <= 0.5;
    ok &= this_ok;
    note("delta=0.3 seed %2llu: input kurtosis %.2f -> fitted delta %.3f, output kurtosis %.3f, %d IGMM iterations  %s",
         (unsigned long long)s, gauss::kurtosis(u.values()), r.delta, k, r.iterations, this_ok ? "ok" : "FAIL");
  }
  int light = 0, unchanged = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Tensor g = randn({4096}, 700 + s);
    if (gauss::kurtosis(g.values()) > 3.0) continue;
    ++light;
    unchanged += gauss::lambert_layer(g) == g;
  }
  Rng rng(9);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Tensor uni({4096});
  for (double& x : uni.values()) x = ud(rng);
  ++light;
  unchanged += gauss::lambert_layer(uni) == uni;
  note("Gaussian draws with kurtosis <= 3 (plus one uniform sample): %d/%d returned bit-identical", unchanged, light);
  ok &= unchanged == light;
  verdict(ok, "IGMM contract", "delta in [0.2, 0.4] and |kurtosis - 3| <= 0.5 on 10 seeds; light tails untouched");
}

// ---------------------------------------------------------------------------------------------

double recovery(const Tensor& p, const Tensor& s) {
  auto corr = [&](std::size_t a, std::size_t b) {
    const Eigen::VectorXd x = p.mat().row(a).transpose(), y = s.mat().row(b).transpose();
    const Eigen::VectorXd xc = x.array() - x.mean(), yc = y.array() - y.mean();
    return std::abs(xc.dot(yc) / (xc.norm() * yc.norm()));
  };
  return std::max(std::min(corr(0, 0), corr(1, 1)), std::min(corr(0, 1), corr(1, 0)));
}

void ica_recovery() {
  bool ok = true;
  const double th = std::numbers::pi / 6;
  RowMatrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  double worst = 1.0, worst_default = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
    Tensor s({2, 4096});
    for (double& x : s.values()) x = u(rng);
    const Tensor v = gauss::zca_whiten(Tensor::from_matrix(rot * s.mat()), 1e-4);
    gauss::IcaOptions opt;
    opt.alpha = 0.95;
    worst = std::min(worst, recovery(gauss::ica_layer(v, opt), s));
    worst_default = std::min(worst_default, recovery(gauss::ica_layer(v), s));
  }
  note("30 deg rotated uniform pair, 4096 samples, 10 seeds, alpha = 0.95: worst |corr| %.4f", worst);
  note("same mixtures at the default alpha = 0.8: worst |corr| %.4f (informational: the damped update's separating "
       "point is unstable for sub-Gaussian sources at this damping)",
       worst_default);
  ok &= worst > 0.95;

  // Full factorial design over symmetric marginals: rows are exactly independent and whitened.
  std::vector<double> sym;
  for (int k = 0; k < 32; ++k) sym.push_back(0.1 * (k + 0.5)), sym.push_back(-0.1 * (k + 0.5));
  Tensor v({2, sym.size() * sym.size()});
  for (std::size_t i = 0; i < sym.size(); ++i)
    for (std::size_t j = 0; j < sym.size(); ++j) {
      v.at(0, i * sym.size() + j) = sym[i];
      v.at(1, i * sym.size() + j) = sym[j];
    }
  ad::Tape t;
  const auto r = gauss::ica_layer(t.constant(v));
  const double dev = max_abs_diff(r.unmixing.value(), Tensor::identity(2));
  note("identity fixed point on an exactly independent design: max |W - I| = %.2e", dev);
  ok &= dev <= 1e-6;
  verdict(ok, "ICA recovery", fmt("worst |corr| %.4f > 0.95 (alpha 0.95); identity kept to %.1e", worst, dev));
}

// ---------------------------------------------------------------------------------------------

struct EikErr {
  double rel = 0, abs = 0;
};

EikErr eikonal_error(std::size_t n) {
  const double h = 1.0 / double(n);
  const fwd::Cell src{n / 2, n / 2};
  const Tensor t = fwd::eikonal_solve(Tensor({n, n}, 1.0), h, src);
  EikErr e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = h * std::hypot(double(i) - double(src.i), double(j) - double(src.j));
      if (d == 0.0) continue;
      const double err = std::abs(t.at(i, j) - d);
      e.abs = std::max(e.abs, err);
      e.rel = std::max(e.rel, err / d);
    }
  return e;
}

void eikonal_solver() {
  const auto t0 = Clock::now();
  const EikErr e64 = eikonal_error(64), e128 = eikonal_error(128);
  const double ratio = e64.abs / e128.abs;
  const double secs = seconds_since(t0);
  note("unit velocity, centre source, unit square: 64^2 max abs %.3e rel %.4f; 128^2 max abs %.3e rel %.4f", e64.abs,
       e64.rel, e128.abs, e128.rel);
  verdict(e128.rel <= 0.02 && ratio >= 1.7 && ratio <= 2.3 && secs < 30.0, "eikonal solver",
          fmt("128^2 L-inf relative error %.2f%% (<= 2%%), refinement ratio %.3f in [1.7, 2.3], %.2fs", 100 * e128.rel,
              ratio, secs));
}

// ---------------------------------------------------------------------------------------------

void end_to_end() {
  const auto t0 = Clock::now();
  int pairs_ok = 0, misfit_ok = 0;
  for (std::uint64_t k = 1; k <= 10; ++k) {
    inv::InversionConfig cfg;
    cfg.problem = inv::ProblemKind::Csmri;
    cfg.snr_db = 10.0;
    cfg.truth_seed = k;
    cfg.noise_seed = 1000 + k;
    cfg.seeds = {k};
    cfg.concurrent = false;
    cfg.reparam = inv::ReparamKind::Glayers;
    const auto g = inv::run_inversion(cfg);
    cfg.reparam = inv::ReparamKind::None;
    const auto n = inv::run_inversion(cfg);
    const auto& rg = g.restarts[0];
    const auto& rn = n.restarts[0];
    const bool pair = rg.ok && rn.ok && rg.gates.all() && !rn.gates.all();
    const double mr = rg.data_misfit / g.noise_energy;
    pairs_ok += pair;
    misfit_ok += mr <= 1.2;
    note("pair %2llu: glayers gates %s (G1 %.2f G2 %.2f corr %.3f norm %.3f), misfit/noise %.3f, psnr %.1f | none gates "
         "%s (corr %.3f norm %.3f), psnr %.1f  %s",
         (unsigned long long)k, rg.gates.all() ? "pass" : "FAIL", rg.diagnostics.mean_skewness,
         rg.diagnostics.mean_excess_kurtosis, rg.diagnostics.max_offdiag_correlation, rg.diagnostics.norm_ratio, mr,
         rg.psnr, rn.gates.all() ? "pass" : "fail", rn.diagnostics.max_offdiag_correlation, rn.diagnostics.norm_ratio,
         rn.psnr, pair ? "ok" : "miss");
  }
  const double secs = seconds_since(t0);
  verdict(pairs_ok >= 8 && misfit_ok == 10 && secs < 300.0, "end-to-end csmri",
          fmt("%d/10 pairs with glayers passing and none failing (need 8), %d/10 glayers misfits <= 1.2x noise, %.0fs",
              pairs_ok, misfit_ok, secs));
}

// ---------------------------------------------------------------------------------------------

double taped_dot(const std::function<ad::Var(ad::Var)>& op, const Tensor& x, std::uint64_t seed, double h = 1e-4) {
  auto fwd = [&](const Tensor& p) {
    ad::Tape t;
    return op(t.constant(p)).value();
  };
  auto vjp = [&](const Tensor& y) {
    ad::Tape t;
    ad::Var in = t.leaf(x);
    return t.backward(op(in), y)[in];
  };
  // Small h keeps the stencil off the Yeo-Johnson branch point at 0; at 1e-3 a few samples straddle it.
  // Offset the probe seed so the direction is never the input itself (scale-invariant maps annihilate it).
  return dot_test([&](const Tensor& dx) { return directional_derivative(fwd, x, dx, h); }, vjp, x.dims(), fwd(x).dims(),
                  seed + 1000);
}

void structural_invariants() {
  bool ok = true;
  // Round trips.
  int trips = 0, trips_ok = 0;
  for (auto [dims, patch] : std::vector<std::pair<Shape, Shape>>{
           {{16, 16}, {2, 2}}, {{3, 64, 64}, {1, 4, 4}}, {{8, 12}, {4, 3}}, {{2, 8, 8}, {2, 4, 2}}}) {
    const gauss::PatchPartition p(dims, patch);
    const Tensor z = randn(dims, trips + 1);
    for (const auto& q : {p, p.with_half_patch_roll()}) {
      ++trips;
      trips_ok += q.assemble(q.partition(z)) == z && q.partition(q.assemble(q.partition(z))) == q.partition(z);
    }
  }
  note("partition / assemble / roll round trips exact: %d/%d", trips_ok, trips);
  ok &= trips_ok == trips;

  double cay = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const std::size_t d = 2 + s % 15;
    const Tensor r = reparam::cayley(scaled(randn({reparam::skew_param_count(d)}, s), 3.0), d);
    cay = std::max(cay, (r.mat().transpose() * r.mat() - RowMatrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  note("Cayley max |R^T R - I| over 20 draws (d = 3..16): %.2e", cay);
  ok &= cay <= 1e-12;

  double sph = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const Tensor v = scaled(randn({16, 16}, s), std::pow(10.0, double(s % 7) - 3));
    sph = std::max(sph, std::abs(norm2(reparam::spherical(v, 0.7)) / (0.7 * 16.0) - 1.0));
  }
  note("spherical map max relative norm error over 20 draws: %.2e", sph);
  ok &= sph <= 1e-14;

  // Adjoint dot tests.
  const Tensor img = fwd::toy_generator(randn({16, 16}, 3));
  const Tensor mask = fwd::make_mask({64, 64}, 4, 8, 7);
  const Tensor w2 = gauss::zca_whiten(scen::log_gamma({4, 256}, 5), 1e-4);
  const gauss::PatchPartition p16({16, 16}, {2, 2});
  const Tensor vfix = randn({16, 16}, 9);
  gauss::LambertOptions tight;
  tight.tol = 1e-13;
  tight.max_iter = 200;
  gauss::GaussianizeConfig pc;
  struct Dot {
    const char* name;
    std::function<double()> run;
  };
  const std::vector<Dot> dots{
      {"blur", [&] {
         return dot_test([](const Tensor& x) { return fwd::blur(x, 3.0); },
                         [](const Tensor& y) { return fwd::blur_vjp(y, 3.0); }, {64, 64}, {64, 64}, 1);
       }},
      {"csmri", [&] {
         return dot_test([&](const Tensor& x) { return fwd::csmri_forward(x, mask); },
                         [&](const Tensor& y) { return fwd::csmri_vjp(y, mask); }, {64, 64}, {64, 64, 2}, 2);
       }},
      {"upsample", [&] { return dot_test(fwd::upsample4, fwd::upsample4_transpose, {16, 16}, {64, 64}, 3); }},
      {"toy generator", [&] {
         const Tensor z = randn({16, 16}, 4);
         return dot_test([&](const Tensor& dz) { return fwd::toy_generator_jvp(z, dz); },
                         [&](const Tensor& r) { return fwd::toy_generator_vjp(z, r); }, {16, 16}, {64, 64}, 4);
       }},
      {"partition", [&] { return taped_dot([&](ad::Var z) { return p16.with_half_patch_roll().partition(z); }, vfix, 5); }},
      {"zca", [&] { return taped_dot([](ad::Var x) { return gauss::zca_whiten(x, 1e-4); }, scen::log_gamma({4, 64}, 6), 6); }},
      {"iterative whitening",
       [&] {
         return taped_dot([](ad::Var x) { return gauss::iterative_whiten(x, 1e-4, 1e-14, 200); },
                          scen::log_gamma({4, 64}, 7), 7);
       }},
      {"ica", [&] { return taped_dot([](ad::Var x) { return gauss::ica_layer(x).output; }, w2, 8); }},
      {"yeo-johnson", [&] {
         return taped_dot([](ad::Var x) { return gauss::yeo_johnson_layer(x).output; }, scen::log_gamma({256}, 9), 9);
       }},
      {"lambert", [&] {
         return taped_dot([&](ad::Var x) { return gauss::lambert_layer(x, tight).output; }, scen::heavy({256}, 0.3, 10),
                          10);
       }},
      {"standardize", [&] { return taped_dot([](ad::Var x) { return gauss::standardize(x, 1.0); }, randn({64}, 11), 11); }},
      {"spherical", [&] { return taped_dot([](ad::Var x) { return reparam::spherical(x, 1.0); }, randn({16, 16}, 12), 12); }},
      {"cayley", [&] { return taped_dot([](ad::Var x) { return reparam::cayley(x, 4); }, randn({6}, 13), 13); }},
      {"orthogonal", [&] {
         return taped_dot([&](ad::Var x) { return reparam::orthogonal_reparam(x, vfix, p16); }, randn({6}, 14), 14);
       }},
      {"pipeline", [&] {
         return taped_dot([&](ad::Var x) { return gauss::gaussianize(x, p16, pc).output; }, randn({16, 16}, 15), 15);
       }},
  };
  int dots_ok = 0;
  double worst = 0;
  std::string line;
  for (const auto& d : dots) {
    const double e = d.run();
    worst = std::max(worst, e);
    dots_ok += e <= 1e-8;
    line += fmt("%s %.1e%s; ", d.name, e, e <= 1e-8 ? "" : " (FAIL)");
  }
  note("adjoint dot tests: %s", line.c_str());
  ok &= dots_ok == int(dots.size());

  // Bit-identical reruns.
  inv::InversionConfig cfg;
  cfg.problem = inv::ProblemKind::Csmri;
  cfg.optimizer.max_iter = 20;
  cfg.seeds = {1, 2};
  const bool rerun_inv = inv::report_json(inv::run_inversion(cfg), false) == inv::report_json(inv::run_inversion(cfg), false);
  gauss::GaussianizeConfig gc;
  gc.roll = true;
  const gauss::PatchPartition big({3, 64, 64}, {1, 4, 4});
  const Tensor heavy = scen::heavy({3, 64, 64}, 0.5, 3);
  const bool rerun_g = gauss::gaussianize(heavy, big, gc) == gauss::gaussianize(heavy, big, gc);
  const auto geo = fwd::EikonalGeometry::square(32, 0.008, 2);
  const Tensor c = fwd::velocity_map(scaled(randn({32, 32}, 4), 0.5));
  const bool rerun_e = fwd::traveltime_table(c, geo) == fwd::traveltime_table(c, geo);
  note("bit-identical reruns: inversion report %s, gaussianize %s, traveltimes %s", rerun_inv ? "yes" : "NO",
       rerun_g ? "yes" : "NO", rerun_e ? "yes" : "NO");
  ok &= rerun_inv && rerun_g && rerun_e;
  verdict(ok, "structural invariants",
          fmt("round trips exact, Cayley %.1e, spherical %.1e, %d/%zu dot tests <= 1e-8 (worst %.1e), reruns identical",
              cay, sph, dots_ok, dots.size(), worst));
}

}  // namespace

// --report: always exit 0 once every criterion has run (ctest uses this; the verdict lines are the record)
int main(int argc, char** argv) {
  const bool report = argc > 1 && std::string(argv[1]) == "--report";
  const auto t0 = Clock::now();
  gradient_fidelity();
  gaussianization_efficacy();
  igmm_contract();
  ica_recovery();
  eikonal_solver();
  end_to_end();
  structural_invariants();
  std::printf("%d criterion(s) failed, total %.0fs\n", failed, seconds_since(t0));
  return report ? 0 : failed;
}
