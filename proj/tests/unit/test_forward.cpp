#include <cmath>
#include <limits>

#include "support.hpp"

#include "glayers/forward/eikonal.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/forward/model.hpp"

using namespace glayers;
using namespace glayers::fwd;

namespace {

double linear_dot(const std::function<Tensor(const Tensor&)>& a, const std::function<Tensor(const Tensor&)>& at,
                  const Tensor& x, const Tensor& y) {
  return prop::rel_diff(dot(a(x), y), dot(x, at(y)));
}

double max_rel_error_vs_distance(std::size_t n, double h, std::size_t* excluded = nullptr) {
  const Cell src{n / 2, n / 2};
  const Tensor t = eikonal_solve(Tensor({n, n}, 1.0), h, src);
  double worst = 0;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double di = double(i) - double(src.i), dj = double(j) - double(src.j);
      if (std::max(std::abs(di), std::abs(dj)) <= 3) {
        ++skipped;
        continue;
      }
      const double d = h * std::hypot(di, dj);
      worst = std::max(worst, std::abs(t.at(i, j) - d) / d);
    }
  if (excluded) *excluded = skipped;
  return worst;
}

}  // namespace

TEST_SUITE("forward-models") {

TEST_CASE("gaussian taps") {
  const auto k = gaussian_taps(3.0);
  CHECK(k.size() == 2 * 12 + 1);
  double s = 0;
  for (double v : k) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k[12] > k[11]);
}

TEST_CASE("blur") {
  Tensor delta({32, 32}, 0.0);
  delta.at(16, 16) = 1.0;
  const Tensor b = blur(delta, 2.0);
  const auto k = gaussian_taps(2.0);
  const std::size_t r = k.size() / 2;
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 32; ++j) {
      const long di = long(i) - 16, dj = long(j) - 16;
      const double expect = (std::abs(di) <= long(r) && std::abs(dj) <= long(r)) ? k[di + r] * k[dj + r] : 0.0;
      CHECK(b.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  const Tensor c = blur(Tensor({32, 32}, 0.3), 3.0);
  for (double v : c.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
  prop::for_all(10, 61, [](prop::Gen& g) {
    const double s = g.uniform(0.5, 5);
    const Shape d{g.integer(8, 40), g.integer(8, 40)};
    CHECK(linear_dot([&](const Tensor& m) { return blur(m, s); }, [&](const Tensor& y) { return blur_vjp(y, s); },
                     g.normal_tensor(d), g.normal_tensor(d)) < 1e-10);
  });
  CHECK_ERROR_KIND(blur(delta, 0.0), ErrorKind::Domain);
}

TEST_CASE("csmri operator") {
  const Tensor m = randn({32, 16}, 1);
  const Tensor full({32, 16}, 1.0), none({32, 16}, 0.0);
  CHECK(prop::rel_diff(norm2(csmri_forward(m, full)), norm2(m)) < 1e-13);
  CHECK(max_abs(csmri_forward(m, none)) == 0.0);
  CHECK(max_abs_diff(csmri_vjp(csmri_forward(m, full), full), m) < 1e-10);
  CHECK(csmri_forward(m, full).is_complex());
  const Tensor mask = make_mask({32, 16}, 4, 4, 3);
  CHECK(linear_dot([&](const Tensor& x) { return csmri_forward(x, mask); },
                   [&](const Tensor& y) { return csmri_vjp(y, mask); }, m, randn({32, 16, 2}, 2)) < 1e-10);
  CHECK_ERROR_KIND(csmri_forward(randn({24, 16}, 1), Tensor({24, 16}, 1.0)), ErrorKind::Shape);
}

TEST_CASE("sampling masks") {
  CHECK(make_mask({64, 64}, 1, 8, 1) == Tensor({64, 64}, 1.0));
  const Tensor m = make_mask({128, 32}, 8, 8, 5);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < 128; ++i) {
    rows += m.at(i, 0) == 1.0;
    for (std::size_t j = 1; j < 32; ++j) CHECK(m.at(i, j) == m.at(i, 0));
  }
  CHECK(rows == 16);
  // Lowest frequencies (natural FFT order: 0..3 and 124..127) are always kept.
  for (std::size_t i : {0, 1, 2, 3, 124, 125, 126, 127}) CHECK(m.at(i, 0) == 1.0);
  CHECK(make_mask({128, 32}, 8, 8, 5) == m);
  CHECK(!(make_mask({128, 32}, 8, 8, 6) == m));
  CHECK_ERROR_KIND(make_mask({64, 64}, 32, 8, 1), ErrorKind::Config);
  CHECK_ERROR_KIND(make_mask({64, 64}, 0.5, 8, 1), ErrorKind::Config);
}

TEST_CASE("noise injection") {
  const Tensor d = randn({64, 64, 2}, 3);
  CHECK(add_noise_snr(d, std::numeric_limits<double>::infinity(), 1) == d);
  for (double target : {0.0, 10.0, 20.0, 40.0}) CHECK(std::abs(snr_db(d, add_noise_snr(d, target, 4)) - target) < 0.5);
  const Tensor mask = make_mask({64, 64}, 4, 8, 7);
  const Tensor clean = csmri_forward(randn({64, 64}, 5), mask);
  const Tensor noisy = add_noise_snr_masked(clean, mask, 10.0, 6);
  CHECK(std::abs(snr_db(clean, noisy) - 10.0) < 0.5);
  for (std::size_t i = 0; i < 64; ++i)
    if (mask.at(i, 0) == 0.0) CHECK(noisy[(i * 64) * 2] == 0.0);
  CHECK(kDeblurNoiseStd == doctest::Approx(50.0 / 255.0 * 2.0));
  CHECK(add_noise_std(d, 0.0, 1) == d);
  const Tensor big = randn({200, 200}, 8);
  const Tensor e = axpy(-1.0, big, add_noise_std(big, 0.3, 9));
  CHECK(norm2(e) / std::sqrt(double(e.size())) == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("toy generator") {
  CHECK(max_abs(toy_generator(Tensor({16, 16}, 0.0))) == 0.0);
  prop::for_all(10, 62, [](prop::Gen& g) {
    const Tensor z = scaled(g.normal_tensor({16, 16}), g.log_uniform(0.1, 100));
    const Tensor m = toy_generator(z);
    CHECK(m.dims() == Shape{64, 64});
    for (double v : m.values()) CHECK(std::abs(v) <= 1.0);  // tanh rounds to 1 for large latents
    const Tensor z0 = g.normal_tensor({16, 16});
    CHECK(linear_dot([&](const Tensor& dz) { return toy_generator_jvp(z0, dz); },
                     [&](const Tensor& r) { return toy_generator_vjp(z0, r); }, g.normal_tensor({16, 16}),
                     g.normal_tensor({64, 64})) < 1e-10);
    CHECK(linear_dot(upsample4, upsample4_transpose, g.normal_tensor({16, 16}), g.normal_tensor({64, 64})) < 1e-12);
  });
  // jvp against central differences
  const Tensor z = randn({16, 16}, 1), dz = unit_direction({16, 16}, 2);
  const Tensor fd = directional_derivative(toy_generator, z, dz);
  CHECK(max_abs_diff(fd, toy_generator_jvp(z, dz)) < 1e-9);
  // constant latent stays constant after upsampling
  const Tensor up = upsample4(Tensor({16, 16}, 0.7));
  for (double v : up.values()) CHECK(v == doctest::Approx(0.7));
}

TEST_CASE("velocity map") {
  const Tensor m = Tensor::vector({-1, 1, 0, 1.5, -3});
  std::size_t clamped = 0;
  const Tensor c = velocity_map(m, &clamped);
  CHECK(c[0] == 1500.0);
  CHECK(c[1] == 1600.0);
  CHECK(c[2] == 1550.0);
  CHECK(c[3] == 1600.0);
  CHECK(c[4] == 1500.0);
  CHECK(clamped == 2);
  const Tensor g = velocity_map_vjp(m, Tensor({5}, 1.0));
  CHECK(g[0] == 50.0);
  CHECK(g[3] == 0.0);
}

TEST_CASE("eikonal accuracy, scaling and causality") {
  std::size_t excluded = 0;
  const double e128 = max_rel_error_vs_distance(128, 1.0 / 128, &excluded);
  CHECK(e128 <= 0.02);
  CHECK(excluded == 49);
  const double e64 = max_rel_error_vs_distance(64, 1.0 / 64);
  CHECK(e64 / e128 >= 1.7);
  CHECK(e64 / e128 <= 2.3);

  const Tensor c1({40, 40}, 1.0);
  const Cell src{3, 30};
  const Tensor t1 = eikonal_solve(c1, 0.01, src);
  const Tensor t2 = eikonal_solve(Tensor({40, 40}, 2.0), 0.01, src);
  CHECK(max_abs_diff(scaled(t1, 0.5), t2) <= 1e-12 * max_abs(t1));
  CHECK(t1.at(3, 30) == 0.0);

  // Heterogeneous medium: every cell outside the source disc has an upwind neighbour with smaller T.
  Tensor c = velocity_map(toy_generator(randn({16, 16}, 4)));
  const Tensor t = eikonal_solve(c, 0.004, {0, 20});
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) {
      CHECK(t.at(i, j) >= 0.0);
      if (std::hypot(double(i), double(j) - 20.0) * 0.004 <= 0.004 * 64 / 16.0) continue;
      double lo = std::numeric_limits<double>::infinity();
      if (i > 0) lo = std::min(lo, t.at(i - 1, j));
      if (i + 1 < 64) lo = std::min(lo, t.at(i + 1, j));
      if (j > 0) lo = std::min(lo, t.at(i, j - 1));
      if (j + 1 < 64) lo = std::min(lo, t.at(i, j + 1));
      CHECK(lo < t.at(i, j));
    }
  CHECK_ERROR_KIND(eikonal_solve(Tensor({8, 8}, -1.0), 0.1, {0, 0}), ErrorKind::Domain);
  CHECK_ERROR_KIND(eikonal_solve(Tensor({8, 8}, 1.0), 0.1, {9, 0}), ErrorKind::Domain);
  EikonalOptions tight;
  tight.max_rounds = 1;
  CHECK_ERROR_KIND(eikonal_solve(c, 0.004, {0, 20}, tight), ErrorKind::Convergence);
}

TEST_CASE("eikonal geometry") {
  const auto g = EikonalGeometry::square();
  CHECK(g.sources.size() == 16);
  CHECK(g.data_count() == 3040);
  for (std::size_t s = 0; s < g.sources.size(); ++s) {
    const Cell src = g.sources[s];
    CHECK((src.i == 0 || src.j == 0 || src.i == 63 || src.j == 63));
    for (const Cell& r : g.receivers[s]) {
      CHECK((r.i == 0 || r.j == 0 || r.i == 63 || r.j == 63));
      CHECK(!(r == src));
    }
  }
  CHECK_ERROR_KIND(EikonalGeometry::square(64, 0.0, 4), ErrorKind::Config);
}

TEST_CASE("eikonal adjoint linearity and zero residual") {
  const auto g = EikonalGeometry::square(32, 0.008, 2);
  const Tensor c = velocity_map(scaled(randn({32, 32}, 5), 0.3));
  const Tensor zero({g.sources.size(), g.receivers[0].size()}, 0.0);
  CHECK(max_abs(traveltime_gradient(c, g, zero)) == 0.0);
  const Tensor r1 = randn(zero.dims(), 6), r2 = randn(zero.dims(), 7);
  const Tensor lhs = traveltime_gradient(c, g, axpy(2.0, r1, r2));
  const Tensor rhs = axpy(2.0, traveltime_gradient(c, g, r1), traveltime_gradient(c, g, r2));
  CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * max_abs(lhs));
}

TEST_CASE("eikonal adjoint against central differences") {
  const auto g = EikonalGeometry::square(32, 0.008, 2);
  const Tensor c = velocity_map(scaled(randn({32, 32}, 8), 0.5));
  const Tensor obs = traveltime_table(velocity_map(scaled(randn({32, 32}, 9), 0.5)), g);
  auto chi = [&](const Tensor& cc) {
    const Tensor r = axpy(-1.0, obs, traveltime_table(cc, g));
    return 0.5 * dot(r, r);
  };
  const Tensor grad = traveltime_gradient(c, g, axpy(-1.0, obs, traveltime_table(c, g)));
  prop::for_all(5, 63, [&](prop::Gen& gen) {
    std::size_t idx;
    do idx = gen.integer(0, c.size() - 1);
    while (grad[idx] == 0.0);
    Tensor cp = c, cm = c;
    cp[idx] += 0.1, cm[idx] -= 0.1;
    CHECK(prop::rel_diff((chi(cp) - chi(cm)) / 0.2, grad[idx]) <= 1e-4);
  });
}

TEST_CASE("traveltime noise") {
  const Tensor t = axpy(1.0, Tensor({4, 50}, 1.0), scaled(randn({4, 50}, 1), 0.1));
  CHECK(traveltime_noise(t, 0.0, 1) == t);
  const Tensor n1 = axpy(-1.0, t, traveltime_noise(t, 0.01, 2));
  const Tensor n2 = axpy(-1.0, scaled(t, 2.0), traveltime_noise(scaled(t, 2.0), 0.01, 2));
  CHECK(max_abs_diff(scaled(n1, 2.0), n2) < 1e-14);
  CHECK(kTraveltimeNoiseStd == 0.001);
  CHECK_ERROR_KIND(traveltime_noise(t, -1.0, 1), ErrorKind::Domain);
}

TEST_CASE("forward models pass the linearized adjoint test") {
  const Tensor m = toy_generator(randn({16, 16}, 10));
  const Tensor mask = make_mask({64, 64}, 4, 8, 7);
  const BlurModel blur_model(3.0);
  const CsmriModel csmri_model(mask);
  for (const ForwardModel* f : std::initializer_list<const ForwardModel*>{&blur_model, &csmri_model}) {
    INFO(f->name());
    const Tensor dm = unit_direction(m.dims(), 11);
    const Tensor jv = directional_derivative([&](const Tensor& x) { return f->simulate(x); }, m, dm);
    const Tensor r = randn(jv.dims(), 12);
    CHECK(prop::rel_diff(dot(jv, r), dot(dm, f->vjp(m, r))) < 1e-8);
  }
  const EikonalModel eik(EikonalGeometry::square(16, 0.016, 1));
  const Tensor m16 = scaled(randn({16, 16}, 13), 0.2);
  const Tensor d = eik.simulate(m16);
  CHECK(d.dims() == Shape{4, eik.simulate(m16).dims()[1]});
  const Tensor r = randn(d.dims(), 14);
  const Tensor g = eik.vjp(m16, r);
  const Tensor dm = unit_direction({16, 16}, 15);
  const double h = 1e-4;
  const double fd = (dot(eik.simulate(axpy(h, dm, m16)), r) - dot(eik.simulate(axpy(-h, dm, m16)), r)) / (2 * h);
  CHECK(prop::rel_diff(fd, dot(dm, g)) < 1e-4);
}

}
