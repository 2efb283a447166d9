#pragma once

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// Row-centers V (D x N) and returns C = (1 - eta) Vc Vc^T / (N - 1) + eta I together with Vc.
struct BlendedCovariance {
  ad::Var centered;
  ad::Var covariance;
};
BlendedCovariance blended_covariance(ad::Var v, double eta);

/// ZCA whitening: D Lambda^{-1/2} D^T applied to the centered patch matrix.
ad::Var zca_whiten(ad::Var v, double eta);
Tensor zca_whiten(const Tensor& v, double eta);
/// The symmetric whitening matrix C^{-1/2} for the blended covariance of v.
Tensor zca_matrix(const Tensor& v, double eta);

/// Newton-Schulz inverse square root: W <- W / sqrt(||W^T C W||_2), then
/// W <- 3/2 W - 1/2 W W^T C W until ||W - W_prev||_F < tol. Throws ConvergenceError after max_iter.
ad::Var iterative_inverse_sqrt(ad::Var c, double tol, int max_iter);
Tensor iterative_inverse_sqrt(const Tensor& c, double tol, int max_iter);

/// Whitening by the iterative inverse square root; output W^T Vc.
ad::Var iterative_whiten(ad::Var v, double eta, double tol, int max_iter);
Tensor iterative_whiten(const Tensor& v, double eta, double tol, int max_iter);

}  // namespace glayers::gauss
