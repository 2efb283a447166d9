#pragma once

#include <cstdint>
#include <vector>

#include "glayers/tensor.hpp"

namespace glayers::fwd {

/// Unit-sum 1D Gaussian taps on [-r, r] with r = ceil(4 sigma).
std::vector<double> gaussian_taps(double sigma);

/// Periodic 2D convolution of an H x W image with the isotropic Gaussian of std sigma (cells).
Tensor blur(const Tensor& m, double sigma);
/// Adjoint of blur: correlation with the same kernel.
Tensor blur_vjp(const Tensor& r, double sigma);

/// Unitary 2D DFT of a real H x W image; result is H x W x 2 (re, im).
Tensor fft2_real(const Tensor& m);
/// Unitary inverse 2D DFT of an H x W x 2 array; returns the real part.
Tensor ifft2_real(const Tensor& d);

/// d = mask o F(m) with F the unitary DFT. mask is H x W with 0/1 entries, rows in natural
/// (unshifted) frequency order. H and W must be powers of two.
Tensor csmri_forward(const Tensor& m, const Tensor& mask);
/// Re(F^{-1}(mask o r)).
Tensor csmri_vjp(const Tensor& r, const Tensor& mask);

/// Row mask keeping `center_lines` lowest-frequency rows plus seeded random rows, H / accl in total.
Tensor make_mask(const Shape& dims, double accl, std::size_t center_lines, std::uint64_t seed);

/// i.i.d. Gaussian noise of per-component std ||d|| / sqrt(#components) * 10^(-snr/20).
/// Infinite snr returns d unchanged.
Tensor add_noise_snr(const Tensor& d, double snr_db, std::uint64_t seed);
/// Same, restricted to the complex entries kept by mask (H x W mask, H x W x 2 data).
Tensor add_noise_snr_masked(const Tensor& d, const Tensor& mask, double snr_db, std::uint64_t seed);
/// Additive N(0, std^2) noise.
Tensor add_noise_std(const Tensor& d, double std, std::uint64_t seed);

/// Deblur noise N(0, 50^2) on 8-bit data, expressed on the [-1, 1] scale.
constexpr double kDeblurNoiseStd = 50.0 / 255.0 * 2.0;

double snr_db(const Tensor& clean, const Tensor& noisy);

/// Fixed stand-in generator: m = tanh(1.2 * blur_1.5(upsample4(z))) for 16 x 16 z -> 64 x 64 m.
Tensor toy_generator(const Tensor& z);
Tensor toy_generator_jvp(const Tensor& z, const Tensor& dz);
Tensor toy_generator_vjp(const Tensor& z, const Tensor& r);

/// Bilinear 4x upsampling with half-pixel centers and periodic wrap, and its transpose.
Tensor upsample4(const Tensor& z);
Tensor upsample4_transpose(const Tensor& r);

constexpr double kGeneratorSigma = 1.5;
constexpr double kGeneratorGain = 1.2;

}  // namespace glayers::fwd
