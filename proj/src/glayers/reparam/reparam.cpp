#include "glayers/reparam/reparam.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "glayers/error.hpp"

namespace glayers::reparam {

ad::Var spherical(ad::Var v, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::Domain, "spherical: gamma must be positive");
  ad::Var nrm = ad::norm2(v);
  if (!(nrm.value().item() > 0.0)) fail(ErrorKind::Numeric, "spherical: zero input has no direction");
  return ad::scale(ad::div(v, nrm), gamma * std::sqrt(static_cast<double>(v.size())));
}

Tensor spherical(const Tensor& v, double gamma) {
  ad::Tape t;
  return spherical(t.constant(v), gamma).value();
}

Tensor skew_from_params(const Tensor& theta, std::size_t d) {
  if (theta.size() != skew_param_count(d))
    fail(ErrorKind::Shape, "cayley: expected " + std::to_string(skew_param_count(d)) + " parameters for D=" +
                               std::to_string(d));
  Tensor w = Tensor::matrix(d, d);
  std::size_t k = 0;
  for (std::size_t i = 1; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j, ++k) {
      w.at(i, j) = -theta[k];
      w.at(j, i) = theta[k];
    }
  return w;
}

ad::Var cayley(ad::Var theta, std::size_t d) {
  const Tensor w = skew_from_params(theta.value(), d);
  const RowMatrix eye = RowMatrix::Identity(d, d);
  Eigen::PartialPivLU<RowMatrix> lu(eye - w.mat());
  const RowMatrix m = lu.inverse();
  if (!m.allFinite()) fail(ErrorKind::Numeric, "cayley: singular I - W");
  const RowMatrix r = (eye + w.mat()) * m;
  return theta.tape()->push(
      ad::OpKind::Custom, Tensor::from_matrix(r), {theta},
      [m, r, d](const Tensor& g) {
        // R = (I + W) M with M = (I - W)^{-1}: dR = (I + R) dW M.
        const RowMatrix wbar = (RowMatrix::Identity(d, d) + r).transpose() * g.mat() * m.transpose();
        Tensor gt(Shape{skew_param_count(d)});
        std::size_t k = 0;
        for (std::size_t i = 1; i < d; ++i)
          for (std::size_t j = 0; j < i; ++j, ++k) gt[k] = wbar(j, i) - wbar(i, j);
        return std::vector<Tensor>{std::move(gt)};
      },
      "cayley");
}

Tensor cayley(const Tensor& theta, std::size_t d) {
  ad::Tape t;
  return cayley(t.constant(theta), d).value();
}

ad::Var orthogonal_reparam(ad::Var theta, const Tensor& v_fixed, const gauss::PatchPartition& p) {
  if (v_fixed.dims() != p.tensor_dims()) fail(ErrorKind::Shape, "orthogonal reparam: v does not match partition");
  const std::size_t d = p.patch_dim();
  if (d > kMaxOrthogonalDim) fail(ErrorKind::Shape, "orthogonal reparam: block dimension above 4096 refused");
  ad::Var r = cayley(theta, d);
  ad::Var v = theta.tape()->constant(p.partition(v_fixed));
  return p.assemble(ad::matmul(r, v));
}

Tensor orthogonal_reparam(const Tensor& theta, const Tensor& v_fixed, const gauss::PatchPartition& p) {
  ad::Tape t;
  return orthogonal_reparam(t.constant(theta), v_fixed, p).value();
}

ad::Var glayer_reparam(ad::Var v, const gauss::PatchPartition& p, const gauss::GaussianizeConfig& cfg) {
  return gauss::gaussianize(v, p, cfg).output;
}

Tensor glayer_reparam(const Tensor& v, const gauss::PatchPartition& p, const gauss::GaussianizeConfig& cfg) {
  return gauss::gaussianize(v, p, cfg);
}

}  // namespace glayers::reparam
