#pragma once

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// (x - mean) / std * gamma with the sample (n - 1) standard deviation.
ad::Var standardize(ad::Var x, double gamma);
Tensor standardize(const Tensor& x, double gamma);

}  // namespace glayers::gauss
