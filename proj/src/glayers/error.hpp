#pragma once

#include <stdexcept>
#include <string>

namespace glayers {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorKind {
  Generic,
  Config,
  Convergence,
  Shape,
  Domain,
  Numeric,
  Degeneracy,
  Io,
  Bracket,
  Evaluation,
  Lookup,
  Variance,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Iterative solver ran out of iterations. Carries the best iterate seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best)
      : Error(ErrorKind::Convergence, what), best_(best) {}
  double best() const noexcept { return best_; }

 private:
  double best_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace glayers
