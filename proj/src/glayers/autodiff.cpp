#include "glayers/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glayers/error.hpp"

namespace glayers::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Neg: return "neg";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::PowI: return "powi";
    case OpKind::Pow: return "pow";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::Variance: return "variance";
    case OpKind::Norm2: return "norm2";
    case OpKind::RowMean: return "row_mean";
    case OpKind::MatMul: return "matmul";
    case OpKind::Transpose: return "transpose";
    case OpKind::DiagExtract: return "diag";
    case OpKind::DiagConstruct: return "diagm";
    case OpKind::SymEigValues: return "symeig_values";
    case OpKind::SymEigVectors: return "symeig_vectors";
    case OpKind::MaxEigenvalue: return "max_eigenvalue";
    case OpKind::Reshape: return "reshape";
    case OpKind::Gather: return "gather";
    case OpKind::Custom: return "custom";
  }
  return "?";
}

const Tensor& Var::value() const {
  if (!tape_) fail(ErrorKind::Lookup, "value() on an unbound Var");
  return tape_->node(id_).value;
}

Tensor Gradients::operator[](Var v) const {
  if (v.tape() != tape_) fail(ErrorKind::Lookup, "variable is not recorded on this tape");
  const Tensor& g = grads_.at(v.id());
  if (g.empty()) return Tensor(v.dims(), 0.0);
  return g;
}

Var Tape::leaf(Tensor value, std::string label) {
  nodes_.push_back(TapeNode{OpKind::Leaf, std::move(label), {}, std::move(value), {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(TapeNode{OpKind::Constant, {}, {}, std::move(value), {}});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v, const char* who) const {
  if (v.tape() != this || v.id() >= nodes_.size())
    fail(ErrorKind::Lookup, std::string(who) + ": variable is not recorded on this tape");
}

Var Tape::push(OpKind kind, Tensor value, std::vector<Var> parents, BackwardFn backward,
               std::string label) {
  std::vector<std::size_t> ids;
  ids.reserve(parents.size());
  for (Var p : parents) {
    check_owned(p, "push");
    ids.push_back(p.id());
  }
  nodes_.push_back(TapeNode{kind, std::move(label), std::move(ids), std::move(value), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var head, const Tensor& seed) const {
  check_owned(head, "backward");
  if (seed.size() != head.size()) fail(ErrorKind::Shape, "backward: seed does not match head");
  std::vector<Tensor> grads(head.id() + 1);
  grads[head.id()] = seed.reshaped(head.dims());
  last_visits_ = 0;
  for (std::size_t i = head.id() + 1; i-- > 0;) {
    if (grads[i].empty()) continue;
    const TapeNode& n = nodes_[i];
    if (!n.backward) continue;
    ++last_visits_;
    std::vector<Tensor> pg = n.backward(grads[i]);
    for (std::size_t k = 0; k < n.parents.size() && k < pg.size(); ++k) {
      if (pg[k].empty()) continue;
      Tensor& dst = grads[n.parents[k]];
      if (dst.empty()) {
        dst = std::move(pg[k]);
      } else {
        if (dst.size() != pg[k].size()) fail(ErrorKind::Shape, "backward: cotangent size mismatch");
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += pg[k][j];
      }
    }
  }
  grads.resize(nodes_.size());
  return Gradients(this, std::move(grads));
}

Tensor Tape::grad(Var head, Var leaf) const {
  check_owned(leaf, "grad");
  if (head.size() != 1) fail(ErrorKind::Shape, "grad: head must be a scalar");
  return backward(head, Tensor::scalar(1.0))[leaf];
}

namespace {

Tape& tape_of(Var a) {
  if (!a.tape()) fail(ErrorKind::Lookup, "op on an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape() || !a.tape()) fail(ErrorKind::Lookup, "operands live on different tapes");
  return *a.tape();
}

enum class Bcast { Same, AScalar, BScalar, AColumn, BColumn };

bool is_column_for(const Tensor& v, const Tensor& m) {
  if (m.rank() != 2 || m.rows() != v.size()) return false;
  return v.rank() == 1 || (v.rank() == 2 && v.dims()[1] == 1);
}

Bcast broadcast_mode(const Tensor& a, const Tensor& b, const char* who) {
  if (a.dims() == b.dims()) return Bcast::Same;
  if (b.size() == 1) return Bcast::BScalar;
  if (a.size() == 1) return Bcast::AScalar;
  if (is_column_for(b, a)) return Bcast::BColumn;
  if (is_column_for(a, b)) return Bcast::AColumn;
  fail(ErrorKind::Shape, std::string(who) + ": incompatible shapes " + shape_string(a.dims()) + " and " +
                             shape_string(b.dims()));
}

struct BinaryIndex {
  Bcast mode;
  std::size_t cols;
  std::size_t ia(std::size_t i) const {
    switch (mode) {
      case Bcast::AScalar: return 0;
      case Bcast::AColumn: return i / cols;
      default: return i;
    }
  }
  std::size_t ib(std::size_t i) const {
    switch (mode) {
      case Bcast::BScalar: return 0;
      case Bcast::BColumn: return i / cols;
      default: return i;
    }
  }
};

// Sums a full-size cotangent down to the operand's shape.
Tensor reduce_like(const Tensor& full, const Tensor& operand, const BinaryIndex& idx, bool is_a) {
  Tensor out(operand.dims(), 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) out[is_a ? idx.ia(i) : idx.ib(i)] += full[i];
  return out;
}

template <typename Fwd, typename DA, typename DB>
Var binary(OpKind kind, Var a, Var b, const char* who, Fwd fwd, DA da, DB db) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Bcast mode = broadcast_mode(av, bv, who);
  const Tensor& big = (mode == Bcast::AScalar || mode == Bcast::AColumn) ? bv : av;
  BinaryIndex idx{mode, big.cols()};
  Tensor out(big.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[idx.ia(i)], bv[idx.ib(i)]);
  Tensor out_copy = out;
  return t.push(kind, std::move(out), {a, b},
                [av, bv, idx, out = std::move(out_copy), da, db](const Tensor& g) {
                  Tensor ga(g.dims()), gb(g.dims());
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    const double x = av[idx.ia(i)], y = bv[idx.ib(i)];
                    ga[i] = g[i] * da(x, y, out[i]);
                    gb[i] = g[i] * db(x, y, out[i]);
                  }
                  return std::vector<Tensor>{reduce_like(ga, av, idx, true), reduce_like(gb, bv, idx, false)};
                });
}

template <typename Fwd, typename D>
Var unary(OpKind kind, Var a, Fwd fwd, D deriv) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  Tensor out_copy = out;
  return t.push(kind, std::move(out), {a}, [av, out = std::move(out_copy), deriv](const Tensor& g) {
    Tensor ga(g.dims());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * deriv(av[i], out[i]);
    return std::vector<Tensor>{std::move(ga)};
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(OpKind::Add, a, b, "add", [](double x, double y) { return x + y; },
                [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(OpKind::Sub, a, b, "sub", [](double x, double y) { return x - y; },
                [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(OpKind::Mul, a, b, "mul", [](double x, double y) { return x * y; },
                [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Var div(Var a, Var b) {
  return binary(OpKind::Div, a, b, "div", [](double x, double y) { return x / y; },
                [](double, double y, double) { return 1.0 / y; },
                [](double, double y, double o) { return -o / y; });
}

Var neg(Var a) {
  return unary(OpKind::Neg, a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double s) {
  return unary(OpKind::Scale, a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(OpKind::AddScalar, a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var tanh(Var a) {
  return unary(OpKind::Tanh, a, [](double x) { return std::tanh(x); },
               [](double, double o) { return 1.0 - o * o; });
}

Var exp(Var a) {
  return unary(OpKind::Exp, a, [](double x) { return std::exp(x); }, [](double, double o) { return o; });
}

Var log(Var a) {
  return unary(OpKind::Log, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary(OpKind::Sqrt, a, [](double x) { return std::sqrt(x); },
               [](double, double o) { return 0.5 / o; });
}

Var powi(Var a, int k) {
  return unary(OpKind::PowI, a, [k](double x) { return std::pow(x, k); },
               [k](double x, double) { return k == 0 ? 0.0 : k * std::pow(x, k - 1); });
}

Var pow(Var a, double p) {
  return unary(OpKind::Pow, a, [p](double x) { return std::pow(x, p); },
               [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const double s = std::accumulate(av.storage().begin(), av.storage().end(), 0.0);
  return t.push(OpKind::Sum, Tensor::scalar(s), {a},
                [dims = av.dims()](const Tensor& g) { return std::vector<Tensor>{Tensor(dims, g.item())}; });
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const double n = static_cast<double>(av.size());
  const double m = std::accumulate(av.storage().begin(), av.storage().end(), 0.0) / n;
  return t.push(OpKind::Mean, Tensor::scalar(m), {a},
                [dims = av.dims(), n](const Tensor& g) { return std::vector<Tensor>{Tensor(dims, g.item() / n)}; });
}

Var variance(Var a, int ddof) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const std::size_t n = av.size();
  if (static_cast<long>(n) - ddof <= 0) fail(ErrorKind::Shape, "variance: not enough samples");
  const double m = std::accumulate(av.storage().begin(), av.storage().end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : av.values()) ss += (x - m) * (x - m);
  const double denom = static_cast<double>(n) - ddof;
  return t.push(OpKind::Variance, Tensor::scalar(ss / denom), {a}, [av, m, denom](const Tensor& g) {
    Tensor ga(av.dims());
    const double k = 2.0 * g.item() / denom;
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] = k * (av[i] - m);
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var norm2(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const double nrm = glayers::norm2(av);
  return t.push(OpKind::Norm2, Tensor::scalar(nrm), {a}, [av, nrm](const Tensor& g) {
    if (nrm == 0.0) fail(ErrorKind::Numeric, "norm2: gradient undefined at zero");
    return std::vector<Tensor>{scaled(av, g.item() / nrm)};
  });
}

Var row_mean(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (av.rank() != 2) fail(ErrorKind::Shape, "row_mean: matrix expected");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out(Shape{r, 1});
  out.mat() = av.mat().rowwise().mean();
  return t.push(OpKind::RowMean, std::move(out), {a}, [r, c](const Tensor& g) {
    Tensor ga = Tensor::matrix(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga.at(i, j) = g[i] / static_cast<double>(c);
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 2 || bv.rank() > 2 || av.cols() != bv.rows())
    fail(ErrorKind::Shape, "matmul: incompatible shapes " + shape_string(av.dims()) + " and " +
                               shape_string(bv.dims()));
  Tensor out = Tensor::matrix(av.rows(), bv.cols());
  out.mat().noalias() = av.mat() * bv.mat();
  return t.push(OpKind::MatMul, std::move(out), {a, b}, [av, bv](const Tensor& g) {
    Tensor ga(av.dims()), gb(bv.dims());
    ga.mat().noalias() = g.mat() * bv.mat().transpose();
    gb.mat().noalias() = av.mat().transpose() * g.mat();
    return std::vector<Tensor>{std::move(ga), std::move(gb)};
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (av.rank() > 2) fail(ErrorKind::Shape, "transpose: matrix expected");
  Tensor out = Tensor::matrix(av.cols(), av.rows());
  out.mat() = av.mat().transpose();
  return t.push(OpKind::Transpose, std::move(out), {a}, [dims = av.dims()](const Tensor& g) {
    Tensor ga(dims);
    ga.mat() = g.mat().transpose();
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var diag(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (av.rank() != 2 || av.rows() != av.cols()) fail(ErrorKind::Shape, "diag: square matrix expected");
  const std::size_t n = av.rows();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) out[i] = av.at(i, i);
  return t.push(OpKind::DiagExtract, std::move(out), {a}, [n](const Tensor& g) {
    Tensor ga = Tensor::matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) ga.at(i, i) = g[i];
    return std::vector<Tensor>{std::move(ga)};
  });
}

Var diagm(Var v) {
  Tape& t = tape_of(v);
  const Tensor& vv = v.value();
  const std::size_t n = vv.size();
  Tensor out = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = vv[i];
  return t.push(OpKind::DiagConstruct, std::move(out), {v}, [n, dims = vv.dims()](const Tensor& g) {
    Tensor gv(dims);
    for (std::size_t i = 0; i < n; ++i) gv[i] = g.at(i, i);
    return std::vector<Tensor>{std::move(gv)};
  });
}

namespace {

Tensor symmetrized(const Tensor& g) {
  Tensor out(g.dims());
  out.mat() = 0.5 * (g.mat() + g.mat().transpose());
  return out;
}

}  // namespace

SymEig symeig(Var c) {
  Tape& t = tape_of(c);
  const Tensor& cv = c.value();
  if (cv.rank() != 2 || cv.rows() != cv.cols()) fail(ErrorKind::Shape, "symeig: square matrix expected");
  const std::size_t n = cv.rows();
  const RowMatrix sym = 0.5 * (cv.mat() + cv.mat().transpose());
  Eigen::SelfAdjointEigenSolver<RowMatrix> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "symeig: decomposition failed");
  RowMatrix u = es.eigenvectors();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index imax = 0;
    u.col(j).cwiseAbs().maxCoeff(&imax);
    if (u(imax, j) < 0.0) u.col(j) *= -1.0;
  }
  Tensor lam(Shape{n});
  for (std::size_t i = 0; i < n; ++i) lam[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
  const Tensor uv = Tensor::from_matrix(u);

  Var values = t.push(OpKind::SymEigValues, lam, {c}, [uv](const Tensor& g) {
    const auto U = uv.mat();
    RowMatrix gm = U * g.mat().col(0).asDiagonal() * U.transpose();
    return std::vector<Tensor>{Tensor::from_matrix(gm)};
  });
  Var vectors = t.push(OpKind::SymEigVectors, uv, {c}, [uv, lam, n](const Tensor& g) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) min_gap = std::min(min_gap, lam[i] - lam[i - 1]);
    if (min_gap < kEigenGapTolerance)
      fail(ErrorKind::Degeneracy, "symeig: eigenvalue gap " + std::to_string(min_gap) +
                                      " below tolerance, eigenvector gradient undefined");
    const auto U = uv.mat();
    RowMatrix inner = U.transpose() * g.mat();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        inner(i, j) = (i == j) ? 0.0 : inner(i, j) / (lam[j] - lam[i]);
    RowMatrix gm = U * inner * U.transpose();
    return std::vector<Tensor>{symmetrized(Tensor::from_matrix(gm))};
  });
  return SymEig{values, vectors};
}

Var max_eigenvalue(Var c) {
  Tape& t = tape_of(c);
  const Tensor& cv = c.value();
  if (cv.rank() != 2 || cv.rows() != cv.cols())
    fail(ErrorKind::Shape, "max_eigenvalue: square matrix expected");
  const RowMatrix sym = 0.5 * (cv.mat() + cv.mat().transpose());
  Eigen::SelfAdjointEigenSolver<RowMatrix> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "max_eigenvalue: decomposition failed");
  const Eigen::Index top = sym.rows() - 1;
  const Eigen::VectorXd u = es.eigenvectors().col(top);
  return t.push(OpKind::MaxEigenvalue, Tensor::scalar(es.eigenvalues()(top)), {c}, [u](const Tensor& g) {
    RowMatrix gm = g.item() * (u * u.transpose());
    return std::vector<Tensor>{Tensor::from_matrix(gm)};
  });
}

Var reshape(Var a, Shape dims) {
  Tape& t = tape_of(a);
  Tensor out = a.value().reshaped(std::move(dims));
  return t.push(OpKind::Reshape, std::move(out), {a},
                [src = a.dims()](const Tensor& g) { return std::vector<Tensor>{g.reshaped(src)}; });
}

Var gather(Var a, std::vector<std::size_t> index, Shape out_dims) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (shape_size(out_dims) != index.size()) fail(ErrorKind::Shape, "gather: index/dims mismatch");
  Tensor out(std::move(out_dims));
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= av.size()) fail(ErrorKind::Shape, "gather: index out of range");
    out[i] = av[index[i]];
  }
  return t.push(OpKind::Gather, std::move(out), {a},
                [src = av.dims(), index = std::move(index)](const Tensor& g) {
                  Tensor ga(src, 0.0);
                  for (std::size_t i = 0; i < index.size(); ++i) ga[index[i]] += g[i];
                  return std::vector<Tensor>{std::move(ga)};
                });
}

}  // namespace glayers::ad
