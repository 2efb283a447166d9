#pragma once

// Minimal reverse-mode tape over dense tensors. Every op records its forward value and a closure
// that maps the output cotangent to one cotangent per parent. Broadcasting is limited to scalars
// and to column vectors against matrices, which is all the Gaussianization layers use.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "glayers/tensor.hpp"

namespace glayers::ad {

enum class OpKind {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Scale,
  AddScalar,
  Tanh,
  Exp,
  Log,
  Sqrt,
  PowI,
  Pow,
  Sum,
  Mean,
  Variance,
  Norm2,
  RowMean,
  MatMul,
  Transpose,
  DiagExtract,
  DiagConstruct,
  SymEigValues,
  SymEigVectors,
  MaxEigenvalue,
  Reshape,
  Gather,
  Custom,
};

const char* op_name(OpKind kind);

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& dims() const { return value().dims(); }
  std::size_t size() const { return value().size(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Maps the node's output cotangent to one cotangent per parent (an empty Tensor means none).
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

struct TapeNode {
  OpKind kind = OpKind::Leaf;
  std::string label;
  std::vector<std::size_t> parents;
  Tensor value;
  BackwardFn backward;
};

/// Gradients of one reverse sweep, indexed by node id.
class Gradients {
 public:
  Gradients(const Tape* tape, std::vector<Tensor> grads) : tape_(tape), grads_(std::move(grads)) {}
  /// Gradient for var; zeros if the head does not depend on it.
  Tensor operator[](Var v) const;

 private:
  const Tape* tape_;
  std::vector<Tensor> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, std::string label = {});
  Var constant(Tensor value);
  Var push(OpKind kind, Tensor value, std::vector<Var> parents, BackwardFn backward,
           std::string label = {});

  const TapeNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep seeded with `seed` (same dims as head).
  Gradients backward(Var head, const Tensor& seed) const;
  /// Gradient of a scalar head with respect to leaf.
  Tensor grad(Var head, Var leaf) const;

  /// Number of backward closures invoked by the last sweep.
  std::size_t last_sweep_visits() const noexcept { return last_visits_; }

 private:
  void check_owned(Var v, const char* who) const;

  std::vector<TapeNode> nodes_;
  mutable std::size_t last_visits_ = 0;
};

// Elementwise binary ops. Operands must match, or one side is a scalar, or one side is an r-vector
// broadcast across the columns of an r x c matrix.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }

Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var powi(Var a, int k);
Var pow(Var a, double p);

Var sum(Var a);
Var mean(Var a);
/// Variance with `ddof` delta degrees of freedom (0 population, 1 sample).
Var variance(Var a, int ddof = 0);
Var norm2(Var a);
/// Mean over columns of an r x c matrix; returns an r-vector.
Var row_mean(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);
Var diag(Var a);   // matrix -> vector of the diagonal
Var diagm(Var v);  // vector -> diagonal matrix

struct SymEig {
  Var values;   // ascending
  Var vectors;  // columns, each normalized so its largest-magnitude entry is positive
};
/// Eigen-decomposition of the symmetric part of a square matrix. The vector adjoint needs distinct
/// eigenvalues; a gap below 1e-8 makes the reverse sweep throw a degeneracy error.
SymEig symeig(Var c);
/// Largest eigenvalue of the symmetric part (the spectral norm for PSD input).
Var max_eigenvalue(Var c);

Var reshape(Var a, Shape dims);
/// out[i] = a[index[i]] where index is a permutation-like gather map.
Var gather(Var a, std::vector<std::size_t> index, Shape out_dims);

constexpr double kEigenGapTolerance = 1e-8;

}  // namespace glayers::ad
