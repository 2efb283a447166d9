#include "glayers/forward/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include <fftw3.h>

#include "glayers/error.hpp"
#include "glayers/random.hpp"

namespace glayers::fwd {

namespace {

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

void require_image(const Tensor& m, const char* who) {
  if (m.rank() != 2) fail(ErrorKind::Shape, std::string(who) + ": H x W image expected, got " + shape_string(m.dims()));
}

// Periodic 1D pass along one axis. flip = false convolves, flip = true correlates.
Tensor filter_axis(const Tensor& m, const std::vector<double>& taps, int axis, bool flip) {
  const std::size_t h = m.dims()[0], w = m.dims()[1];
  const long r = static_cast<long>(taps.size() / 2);
  Tensor out(m.dims(), 0.0);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (long k = -r; k <= r; ++k) {
        const long off = flip ? k : -k;
        const double v = axis == 1 ? m[i * w + wrap(static_cast<long>(j) + off, w)]
                                   : m[wrap(static_cast<long>(i) + off, h) * w + j];
        acc += taps[static_cast<std::size_t>(k + r)] * v;
      }
      out[i * w + j] = acc;
    }
  return out;
}

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Unitary complex 2D DFT in place on interleaved (re, im) data.
void dft2(std::vector<double>& data, std::size_t h, std::size_t w, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * h * w));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, sign, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < h * w; ++i) {
    buf[i][0] = data[2 * i];
    buf[i][1] = data[2 * i + 1];
  }
  fftw_execute(plan);
  const double s = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (std::size_t i = 0; i < h * w; ++i) {
    data[2 * i] = buf[i][0] * s;
    data[2 * i + 1] = buf[i][1] * s;
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

void require_mask(const Tensor& mask, std::size_t h, std::size_t w) {
  if (mask.dims() != Shape{h, w}) fail(ErrorKind::Shape, "csmri: mask must be " + shape_string({h, w}));
}

struct Tap {
  std::size_t i0, i1;
  double w0, w1;
};

std::vector<Tap> upsample_taps(std::size_t n) {
  std::vector<Tap> taps(4 * n);
  for (std::size_t o = 0; o < 4 * n; ++o) {
    const double x = (static_cast<double>(o) + 0.5) / 4.0 - 0.5;
    const double f = std::floor(x);
    const double t = x - f;
    const long i = static_cast<long>(f);
    taps[o] = {wrap(i, n), wrap(i + 1, n), 1.0 - t, t};
  }
  return taps;
}

}  // namespace

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::Domain, "blur: sigma must be positive");
  const long r = static_cast<long>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
  for (long k = -r; k <= r; ++k)
    taps[static_cast<std::size_t>(k + r)] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= total;
  return taps;
}

Tensor blur(const Tensor& m, double sigma) {
  require_image(m, "blur");
  const auto taps = gaussian_taps(sigma);
  return filter_axis(filter_axis(m, taps, 1, false), taps, 0, false);
}

Tensor blur_vjp(const Tensor& r, double sigma) {
  require_image(r, "blur_vjp");
  const auto taps = gaussian_taps(sigma);
  return filter_axis(filter_axis(r, taps, 0, true), taps, 1, true);
}

Tensor fft2_real(const Tensor& m) {
  require_image(m, "fft2");
  const std::size_t h = m.dims()[0], w = m.dims()[1];
  std::vector<double> data(2 * h * w, 0.0);
  for (std::size_t i = 0; i < h * w; ++i) data[2 * i] = m[i];
  dft2(data, h, w, FFTW_FORWARD);
  Tensor out(Shape{h, w, 2}, std::move(data));
  out.mark_complex();
  return out;
}

Tensor ifft2_real(const Tensor& d) {
  if (d.rank() != 3 || d.dims()[2] != 2) fail(ErrorKind::Shape, "ifft2: H x W x 2 array expected");
  const std::size_t h = d.dims()[0], w = d.dims()[1];
  std::vector<double> data = d.storage();
  dft2(data, h, w, FFTW_BACKWARD);
  Tensor out(Shape{h, w});
  for (std::size_t i = 0; i < h * w; ++i) out[i] = data[2 * i];
  return out;
}

Tensor csmri_forward(const Tensor& m, const Tensor& mask) {
  require_image(m, "csmri");
  const std::size_t h = m.dims()[0], w = m.dims()[1];
  if (!is_pow2(h) || !is_pow2(w)) fail(ErrorKind::Shape, "csmri: image dims must be powers of two");
  require_mask(mask, h, w);
  Tensor d = fft2_real(m);
  for (std::size_t i = 0; i < h * w; ++i) {
    d[2 * i] *= mask[i];
    d[2 * i + 1] *= mask[i];
  }
  return d;
}

Tensor csmri_vjp(const Tensor& r, const Tensor& mask) {
  if (r.rank() != 3 || r.dims()[2] != 2) fail(ErrorKind::Shape, "csmri_vjp: H x W x 2 residual expected");
  const std::size_t h = r.dims()[0], w = r.dims()[1];
  if (!is_pow2(h) || !is_pow2(w)) fail(ErrorKind::Shape, "csmri: image dims must be powers of two");
  require_mask(mask, h, w);
  Tensor masked = r;
  for (std::size_t i = 0; i < h * w; ++i) {
    masked[2 * i] *= mask[i];
    masked[2 * i + 1] *= mask[i];
  }
  return ifft2_real(masked);
}

Tensor make_mask(const Shape& dims, double accl, std::size_t center_lines, std::uint64_t seed) {
  if (dims.size() != 2) fail(ErrorKind::Shape, "make_mask: H x W dims expected");
  if (!(accl >= 1.0)) fail(ErrorKind::Config, "make_mask: acceleration must be >= 1");
  const std::size_t h = dims[0], w = dims[1];
  const auto kept = static_cast<std::size_t>(std::llround(static_cast<double>(h) / accl));
  if (kept < center_lines || center_lines > h || kept == 0)
    fail(ErrorKind::Config, "make_mask: acceleration " + std::to_string(accl) + " cannot keep " +
                                std::to_string(center_lines) + " center lines of " + std::to_string(h));
  std::vector<char> keep(h, 0);
  for (std::size_t k = 0; k < center_lines; ++k)
    keep[wrap(static_cast<long>(k) - static_cast<long>(center_lines / 2), h)] = 1;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < h; ++i)
    if (!keep[i]) others.push_back(i);
  Rng rng(seed);
  for (std::size_t k = 0; k + center_lines < kept; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, others.size() - 1);
    std::swap(others[k], others[pick(rng)]);
    keep[others[k]] = 1;
  }
  Tensor mask(Shape{h, w}, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    if (keep[i])
      for (std::size_t j = 0; j < w; ++j) mask[i * w + j] = 1.0;
  return mask;
}

Tensor add_noise_snr(const Tensor& d, double snr, std::uint64_t seed) {
  if (std::isinf(snr) && snr > 0) return d;
  const double std = norm2(d) / std::sqrt(static_cast<double>(d.size())) * std::pow(10.0, -snr / 20.0);
  return add_noise_std(d, std, seed);
}

Tensor add_noise_snr_masked(const Tensor& d, const Tensor& mask, double snr, std::uint64_t seed) {
  if (d.rank() != 3 || d.dims()[2] != 2) fail(ErrorKind::Shape, "add_noise_snr_masked: H x W x 2 data expected");
  require_mask(mask, d.dims()[0], d.dims()[1]);
  if (std::isinf(snr) && snr > 0) return d;
  double energy = 0.0;
  std::size_t comps = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] != 0.0) {
      energy += d[2 * i] * d[2 * i] + d[2 * i + 1] * d[2 * i + 1];
      comps += 2;
    }
  if (comps == 0) return d;
  const double std = std::sqrt(energy / static_cast<double>(comps)) * std::pow(10.0, -snr / 20.0);
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, std);
  Tensor out = d;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] != 0.0) {
      out[2 * i] += nd(rng);
      out[2 * i + 1] += nd(rng);
    }
  return out;
}

Tensor add_noise_std(const Tensor& d, double std, std::uint64_t seed) {
  if (!(std >= 0.0)) fail(ErrorKind::Domain, "noise: std must be non-negative");
  Tensor out = d;
  if (std == 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, std);
  for (double& v : out.values()) v += nd(rng);
  return out;
}

double snr_db(const Tensor& clean, const Tensor& noisy) {
  require_same_dims(clean, noisy, "snr_db");
  const double e = norm2(axpy(-1.0, clean, noisy));
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(norm2(clean) / e);
}

Tensor upsample4(const Tensor& z) {
  require_image(z, "upsample4");
  const std::size_t h = z.dims()[0], w = z.dims()[1];
  const auto ti = upsample_taps(h), tj = upsample_taps(w);
  Tensor out(Shape{4 * h, 4 * w});
  for (std::size_t i = 0; i < 4 * h; ++i)
    for (std::size_t j = 0; j < 4 * w; ++j) {
      const Tap& a = ti[i];
      const Tap& b = tj[j];
      out[i * 4 * w + j] = a.w0 * (b.w0 * z[a.i0 * w + b.i0] + b.w1 * z[a.i0 * w + b.i1]) +
                           a.w1 * (b.w0 * z[a.i1 * w + b.i0] + b.w1 * z[a.i1 * w + b.i1]);
    }
  return out;
}

Tensor upsample4_transpose(const Tensor& r) {
  require_image(r, "upsample4_transpose");
  if (r.dims()[0] % 4 || r.dims()[1] % 4) fail(ErrorKind::Shape, "upsample4_transpose: dims must divide by 4");
  const std::size_t h = r.dims()[0] / 4, w = r.dims()[1] / 4;
  const auto ti = upsample_taps(h), tj = upsample_taps(w);
  Tensor out(Shape{h, w}, 0.0);
  for (std::size_t i = 0; i < 4 * h; ++i)
    for (std::size_t j = 0; j < 4 * w; ++j) {
      const double g = r[i * 4 * w + j];
      const Tap& a = ti[i];
      const Tap& b = tj[j];
      out[a.i0 * w + b.i0] += a.w0 * b.w0 * g;
      out[a.i0 * w + b.i1] += a.w0 * b.w1 * g;
      out[a.i1 * w + b.i0] += a.w1 * b.w0 * g;
      out[a.i1 * w + b.i1] += a.w1 * b.w1 * g;
    }
  return out;
}

namespace {
Tensor generator_preactivation(const Tensor& z) { return scaled(blur(upsample4(z), kGeneratorSigma), kGeneratorGain); }
}  // namespace

Tensor toy_generator(const Tensor& z) {
  Tensor m = generator_preactivation(z);
  for (double& v : m.values()) v = std::tanh(v);
  return m;
}

Tensor toy_generator_jvp(const Tensor& z, const Tensor& dz) {
  const Tensor m = toy_generator(z);
  Tensor out = generator_preactivation(dz);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= 1.0 - m[i] * m[i];
  return out;
}

Tensor toy_generator_vjp(const Tensor& z, const Tensor& r) {
  const Tensor m = toy_generator(z);
  require_same_dims(m, r, "toy_generator_vjp");
  Tensor g = r;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= kGeneratorGain * (1.0 - m[i] * m[i]);
  return upsample4_transpose(blur_vjp(g, kGeneratorSigma));
}

}  // namespace glayers::fwd
