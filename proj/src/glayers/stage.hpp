#pragma once

#include <functional>
#include <string>

#include "glayers/autodiff.hpp"
#include "glayers/tensor.hpp"

namespace glayers {

/// A differentiable operator: forward map plus vector-Jacobian product.
struct Stage {
  std::string name;
  std::function<Tensor(const Tensor&)> apply;
  /// (input, output, output cotangent) -> input cotangent.
  std::function<Tensor(const Tensor&, const Tensor&, const Tensor&)> vjp;

  Tensor operator()(const Tensor& x) const { return apply(x); }
  Tensor pullback(const Tensor& x, const Tensor& cot) const { return vjp(x, apply(x), cot); }
};

using TapedFn = std::function<ad::Var(ad::Var)>;

/// Wraps a taped function. The vjp replays the forward pass on a fresh tape.
Stage make_stage(std::string name, TapedFn fn);

/// Sequential composition; the vjp chains the stage vjps in reverse.
Stage compose(std::string name, std::vector<Stage> stages);

}  // namespace glayers
