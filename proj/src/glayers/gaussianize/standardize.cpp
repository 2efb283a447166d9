#include "glayers/gaussianize/standardize.hpp"

#include <cmath>

#include "glayers/error.hpp"

namespace glayers::gauss {

ad::Var standardize(ad::Var x, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorKind::Domain, "standardize: gamma must be positive");
  if (x.size() < 2) fail(ErrorKind::Shape, "standardize: needs at least 2 entries");
  ad::Var var = ad::variance(x, 1);
  if (!(var.value().item() > 0.0)) fail(ErrorKind::Variance, "standardize: zero variance");
  ad::Var centered = ad::sub(x, ad::mean(x));
  return ad::scale(ad::div(centered, ad::sqrt(var)), gamma);
}

Tensor standardize(const Tensor& x, double gamma) {
  ad::Tape t;
  return standardize(t.constant(x), gamma).value();
}

}  // namespace glayers::gauss
