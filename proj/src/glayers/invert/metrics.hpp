#pragma once

#include "glayers/tensor.hpp"

namespace glayers::inv {

/// 10 log10(peak^2 / MSE), capped at 100 dB when MSE < 1e-10.
double psnr(const Tensor& ref, const Tensor& test, double peak = 2.0);

/// Mean SSIM over valid 11 x 11 Gaussian windows (sigma 1.5), K1 = 0.01, K2 = 0.03, L = peak.
double ssim(const Tensor& ref, const Tensor& test, double peak = 2.0);

}  // namespace glayers::inv
