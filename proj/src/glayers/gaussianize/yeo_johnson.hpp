#pragma once

#include <span>
#include <vector>

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// Four-branch Yeo-Johnson power transform, continuous in p and lambda.
double yeo_johnson(double p, double lambda);
Tensor yeo_johnson(const Tensor& p, double lambda);

/// Value and partial derivatives of the transform at one point.
struct YeoJohnsonPartials {
  double s;         // s(lambda, p)
  double ds_dl;     // ds / dlambda
  double d2s_dl2;   // d2s / dlambda2
  double ds_dp;     // ds / dp
  double d2s_dldp;  // d2s / dlambda dp
};
YeoJohnsonPartials yeo_johnson_partials(double p, double lambda);

/// Profile log-likelihood -n/2 log Var(s) + (lambda - 1) sum sign(p) log(|p| + 1).
double yeo_johnson_loglik(std::span<const double> p, double lambda);
/// d loglik / d lambda.
double yeo_johnson_score(std::span<const double> p, double lambda);

constexpr double kLambdaLo = -5.0;
constexpr double kLambdaHi = 5.0;

/// Maximum-likelihood lambda: Brent minimization of the negative likelihood on [-5, 5], polished
/// by Brent root finding on the score. Needs at least 3 non-constant samples.
double fit_yeo_johnson_lambda(std::span<const double> p);

/// Layer: fits lambda on all entries jointly and applies the transform. The reverse pass adds the
/// implicit-function term d lambda / dp = -L_p / L_lambda, where L is the score.
struct YeoJohnsonResult {
  ad::Var output;
  double lambda;
};
YeoJohnsonResult yeo_johnson_layer(ad::Var p);
Tensor yeo_johnson_layer(const Tensor& p);

constexpr std::size_t kMinLayerSamples = 8;

}  // namespace glayers::gauss
