#pragma once

#include <span>

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// Pearson kurtosis m4 / m2^2 (3 for a Gaussian).
double kurtosis(std::span<const double> x);

/// Heavy-tail map s = u exp(delta/2 u^2).
double heavy_tail(double u, double delta);
Tensor heavy_tail(const Tensor& u, double delta);

constexpr double kDeltaLo = 1e-6;
constexpr double kDeltaHi = 5.0;

/// Tail parameter delta in [1e-6, 5] making Kurt(W_delta(u)) = 3, searched over log delta.
/// Returns the bracket end nearest to the target when no exact solution exists.
double fit_delta(std::span<const double> u);

/// delta = fit_delta(u) as a taped scalar. The reverse pass differentiates the root condition
/// Kurt(W_delta(u)) = 3; a solution pinned at a bracket end has zero gradient.
ad::Var delta_solve(ad::Var u);

/// Elementwise W_delta(u) with delta a taped scalar.
ad::Var w_delta(ad::Var u, ad::Var delta);

struct LambertOptions {
  double tol = 1e-5;  // stop when the (mu, sigma, delta) update is below this
  int max_iter = 100;
};

struct LambertResult {
  ad::Var output;
  double delta = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  int iterations = 0;
  bool skipped = false;  // input kurtosis <= 3
};

/// Lambert W x F_X Gaussianization with one shared delta fitted by IGMM. Inputs with kurtosis
/// <= 3 pass through unchanged. All executed IGMM iterations are recorded on the tape.
LambertResult lambert_layer(ad::Var s, const LambertOptions& opt = {});
Tensor lambert_layer(const Tensor& s, const LambertOptions& opt = {});

}  // namespace glayers::gauss
