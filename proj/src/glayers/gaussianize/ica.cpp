#include "glayers/gaussianize/ica.hpp"

#include <algorithm>
#include <cmath>

#include "glayers/error.hpp"

namespace glayers::gauss {

namespace {

double frobenius_diff(const Tensor& a, const Tensor& b) { return (a.mat() - b.mat()).norm(); }

void check_finite(const Tensor& t) {
  for (double x : t.values())
    if (!std::isfinite(x)) fail(ErrorKind::Numeric, "ica: non-finite intermediate");
}

}  // namespace

IcaResult ica_layer(ad::Var v, const IcaOptions& opt) {
  const Tensor& vv = v.value();
  if (vv.rank() != 2) fail(ErrorKind::Shape, "ica: patch matrix (D x N) expected");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) fail(ErrorKind::Domain, "ica: alpha must lie in (0, 1)");
  ad::Tape& t = *v.tape();
  const std::size_t d = vv.rows();
  const double n = static_cast<double>(vv.cols());

  ad::Var w = t.constant(Tensor::identity(d));
  Tensor w_star = w.value();
  int j = 1;
  for (; j <= opt.max_outer; ++j) {
    ad::Var y = ad::matmul(ad::transpose(w), v);
    ad::Var phi = ad::tanh(y);
    ad::Var dphi = ad::add_scalar(ad::neg(ad::mul(phi, phi)), 1.0);
    ad::Var pull = ad::scale(ad::matmul(v, ad::transpose(phi)), opt.alpha / n);
    w = ad::sub(pull, ad::matmul(w, ad::diagm(ad::row_mean(dphi))));

    // Symmetric decorrelation.
    w = ad::div(w, ad::sqrt(ad::max_eigenvalue(ad::matmul(ad::transpose(w), w))));
    Tensor w0 = w.value();
    for (int k = 1; k < opt.max_decorrelate; ++k) {
      w = ad::sub(ad::scale(w, 1.5), ad::scale(ad::matmul(ad::matmul(w, ad::transpose(w)), w), 0.5));
      if (frobenius_diff(w.value(), w0) < opt.tol) break;
      w0 = w.value();
    }
    check_finite(w.value());
    if (frobenius_diff(w.value(), w_star) < opt.tol) break;
    w_star = w.value();
  }
  ad::Var p = ad::matmul(ad::transpose(w), v);
  check_finite(p.value());
  return {p, w, std::min(j, opt.max_outer)};
}

Tensor ica_layer(const Tensor& v, const IcaOptions& opt) {
  ad::Tape t;
  return ica_layer(t.constant(v), opt).output.value();
}

}  // namespace glayers::gauss
