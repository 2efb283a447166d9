#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "glayers/gradcheck.hpp"
#include "glayers/tensor.hpp"

namespace glayers::opt {

struct LbfgsConfig {
  int memory = 10;
  int max_iter = 300;
  double grad_tol = 1e-8;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_linesearch = 25;  // function evaluations per line search

  void validate() const;
};

/// One accepted step: loss and directional slopes before and after, for checking the Wolfe conditions.
struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;       // after the step
  double grad_norm = 0.0;  // after the step
  double step = 0.0;
  double loss_before = 0.0;
  double slope_before = 0.0;  // <g_k, d_k>
  double slope_after = 0.0;   // <g_{k+1}, d_k>
  int evaluations = 0;
};

struct LbfgsResult {
  Tensor x;
  double loss = 0.0;
  Tensor grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // gradient tolerance reached
  std::string status;      // "converged", "max_iter", "line_search_failed"
  int restarts = 0;        // steepest-descent restarts after a failed line search
  double initial_loss = 0.0;
  std::vector<IterationRecord> trace;
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double loss = 0.0;
  Tensor x;
  Tensor grad;
  int evaluations = 0;
};

/// Strong Wolfe line search (bracketing then zoom with safeguarded cubic interpolation) along d from
/// x with loss f0 and gradient g0.
LineSearchResult strong_wolfe(const ValueAndGrad& f, const Tensor& x, double f0, const Tensor& g0, const Tensor& d,
                              double alpha0, double c1, double c2, int max_evals);

/// Limited-memory BFGS with the two-loop recursion. Curvature pairs with s.y <= 1e-10 |s||y| are
/// skipped. A failed line search restarts once from steepest descent, then stops with the best iterate.
LbfgsResult lbfgs(const ValueAndGrad& f, const Tensor& x0, const LbfgsConfig& cfg = {});

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int steps = 1000;
};

struct AdamResult {
  Tensor x;
  std::vector<double> losses;  // loss at each visited iterate, starting with x0
};

AdamResult adam(const ValueAndGrad& f, const Tensor& x0, const AdamConfig& cfg = {});

}  // namespace glayers::opt
