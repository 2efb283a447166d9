#pragma once

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

struct IcaOptions {
  double alpha = 0.8;      // damping of the fixed-point update
  int max_outer = 10;      // J
  int max_decorrelate = 100;  // K
  double tol = 1e-5;
};

struct IcaResult {
  ad::Var output;  // P = W^T V
  ad::Var unmixing;  // W (orthogonal)
  int outer_iterations = 0;
};

/// Damped FastICA with the logcosh contrast and symmetric decorrelation, starting from W = I.
/// The executed iterations are recorded on the tape, so gradients flow through the loops.
IcaResult ica_layer(ad::Var v, const IcaOptions& opt = {});
Tensor ica_layer(const Tensor& v, const IcaOptions& opt = {});

}  // namespace glayers::gauss
