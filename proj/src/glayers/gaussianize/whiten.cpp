#include "glayers/gaussianize/whiten.hpp"

#include <cmath>
#include <string>

#include "glayers/error.hpp"

namespace glayers::gauss {

namespace {

void check_whiten_input(const Tensor& v, double eta) {
  if (v.rank() != 2) fail(ErrorKind::Shape, "whiten: patch matrix (D x N) expected");
  if (v.cols() < v.rows())
    fail(ErrorKind::Shape, "whiten: rank deficient, " + std::to_string(v.cols()) + " patches for dimension " +
                               std::to_string(v.rows()));
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::Domain, "whiten: eta must lie in (0, 1)");
}

double frobenius_diff(const Tensor& a, const Tensor& b) { return (a.mat() - b.mat()).norm(); }

}  // namespace

BlendedCovariance blended_covariance(ad::Var v, double eta) {
  check_whiten_input(v.value(), eta);
  ad::Tape& t = *v.tape();
  const std::size_t d = v.value().rows();
  const double n = static_cast<double>(v.value().cols());
  ad::Var vc = ad::sub(v, ad::row_mean(v));
  ad::Var s = ad::scale(ad::matmul(vc, ad::transpose(vc)), (1.0 - eta) / (n - 1.0));
  ad::Var c = ad::add(s, t.constant(scaled(Tensor::identity(d), eta)));
  return {vc, c};
}

ad::Var zca_whiten(ad::Var v, double eta) {
  auto [vc, c] = blended_covariance(v, eta);
  ad::SymEig eig = ad::symeig(c);
  ad::Var inv_sqrt = ad::pow(eig.values, -0.5);
  ad::Var w = ad::matmul(ad::matmul(eig.vectors, ad::diagm(inv_sqrt)), ad::transpose(eig.vectors));
  return ad::matmul(w, vc);
}

Tensor zca_whiten(const Tensor& v, double eta) {
  ad::Tape t;
  return zca_whiten(t.constant(v), eta).value();
}

Tensor zca_matrix(const Tensor& v, double eta) {
  ad::Tape t;
  auto [vc, c] = blended_covariance(t.constant(v), eta);
  Eigen::SelfAdjointEigenSolver<RowMatrix> es(c.value().mat());
  RowMatrix w = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  return Tensor::from_matrix(w);
}

ad::Var iterative_inverse_sqrt(ad::Var c, double tol, int max_iter) {
  const Tensor& cv = c.value();
  if (cv.rank() != 2 || cv.rows() != cv.cols()) fail(ErrorKind::Shape, "inverse sqrt: square matrix expected");
  ad::Tape& t = *c.tape();
  const std::size_t d = cv.rows();
  ad::Var w = t.constant(Tensor::identity(d));
  w = ad::div(w, ad::sqrt(ad::max_eigenvalue(ad::matmul(ad::matmul(ad::transpose(w), c), w))));
  for (int k = 0; k < max_iter; ++k) {
    ad::Var wtcw = ad::matmul(ad::matmul(ad::transpose(w), c), w);
    ad::Var next = ad::sub(ad::scale(w, 1.5), ad::scale(ad::matmul(w, wtcw), 0.5));
    const double change = frobenius_diff(next.value(), w.value());
    if (!std::isfinite(change)) fail(ErrorKind::Numeric, "inverse sqrt: non-finite iterate");
    w = next;
    if (change < tol) return w;
  }
  throw ConvergenceError("iterative whitening: no convergence in " + std::to_string(max_iter) + " iterations",
                         0.0);
}

Tensor iterative_inverse_sqrt(const Tensor& c, double tol, int max_iter) {
  ad::Tape t;
  return iterative_inverse_sqrt(t.constant(c), tol, max_iter).value();
}

ad::Var iterative_whiten(ad::Var v, double eta, double tol, int max_iter) {
  auto [vc, c] = blended_covariance(v, eta);
  ad::Var w = iterative_inverse_sqrt(c, tol, max_iter);
  return ad::matmul(ad::transpose(w), vc);
}

Tensor iterative_whiten(const Tensor& v, double eta, double tol, int max_iter) {
  ad::Tape t;
  return iterative_whiten(t.constant(v), eta, tol, max_iter).value();
}

}  // namespace glayers::gauss
