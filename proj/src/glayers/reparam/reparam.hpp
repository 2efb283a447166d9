#pragma once

#include <cstddef>

#include "glayers/autodiff.hpp"
#include "glayers/gaussianize/partition.hpp"
#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/tensor.hpp"

namespace glayers::reparam {

/// v / ||v|| * gamma * sqrt(n).
ad::Var spherical(ad::Var v, double gamma);
Tensor spherical(const Tensor& v, double gamma);

/// Number of free parameters of a D x D skew-symmetric matrix.
constexpr std::size_t skew_param_count(std::size_t d) { return d * (d - 1) / 2; }

/// Skew-symmetric W = A^T - A from the strictly lower-triangular A filled row-major with theta.
Tensor skew_from_params(const Tensor& theta, std::size_t d);

/// Cayley map R = (I + W)(I - W)^{-1} of the skew matrix built from theta.
ad::Var cayley(ad::Var theta, std::size_t d);
Tensor cayley(const Tensor& theta, std::size_t d);

constexpr std::size_t kMaxOrthogonalDim = 4096;

/// z = R v per patch: partition(v_fixed) is D x N and R is D x D.
ad::Var orthogonal_reparam(ad::Var theta, const Tensor& v_fixed, const gauss::PatchPartition& p);
Tensor orthogonal_reparam(const Tensor& theta, const Tensor& v_fixed, const gauss::PatchPartition& p);

/// h^dagger(v): the Gaussianization pipeline used as a latent map.
ad::Var glayer_reparam(ad::Var v, const gauss::PatchPartition& p, const gauss::GaussianizeConfig& cfg);
Tensor glayer_reparam(const Tensor& v, const gauss::PatchPartition& p, const gauss::GaussianizeConfig& cfg);

}  // namespace glayers::reparam
