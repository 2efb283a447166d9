#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glayers/gradcheck.hpp"

namespace glayers::inv {

struct GradcheckReport {
  std::string id;
  bool adjoint = false;  // true: adjoint vs central FD on sampled cells, false: Taylor remainder slope
  FdConvergence fd;
  std::vector<double> cell_rel_error;
  double max_rel_error = 0.0;
  bool pass = false;
  double seconds = 0.0;
  /// Human-readable eps-vs-error table (or per-cell errors) and verdict.
  std::string table() const;
};

constexpr double kMinSlope = 1.8;
constexpr double kMaxSlope = 2.2;
constexpr double kMaxAdjointRelError = 1e-4;

const std::vector<std::string>& gradcheck_ids();
bool is_gradcheck_id(const std::string& id);

/// Heads are 1/2 ||op(x) - a||^2 with random x and target a drawn from `seed`; problem ids use the
/// inversion objective itself. Throws a Config error for an unknown id.
GradcheckReport run_gradcheck(const std::string& id, std::uint64_t seed);

}  // namespace glayers::inv
