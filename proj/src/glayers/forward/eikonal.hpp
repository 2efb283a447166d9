#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "glayers/tensor.hpp"

namespace glayers::fwd {

struct Cell {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Square survey: sources on each side, receivers on the three other sides of each source.
struct EikonalGeometry {
  std::size_t rows = 64;
  std::size_t cols = 64;
  double spacing = 0.004;  // m
  std::vector<Cell> sources;
  std::vector<std::vector<Cell>> receivers;  // per source

  /// n x n grid with `per_side` evenly spaced sources on every side; receivers on every boundary cell
  /// of the three sides not holding the source.
  static EikonalGeometry square(std::size_t n = 64, double spacing = 0.004, std::size_t per_side = 4);
  std::size_t data_count() const;
};

struct EikonalOptions {
  double rel_tol = 1e-9;   // stop when the largest update is below rel_tol * max T
  int max_rounds = 100;    // rounds of four sweeps
  double source_radius = 0.0;  // exact-distance initialization radius in metres; 0 picks the default
};

/// Default initialization radius as a fraction of the grid extent (fixed in physical units, so the
/// scheme stays first order under refinement).
constexpr double kSourceRadiusFraction = 1.0 / 16.0;

/// First-arrival traveltimes for |grad T| = 1 / c by fast sweeping with the Godunov upwind stencil.
/// Cells within the source radius are initialized with distance / c(source) and held fixed.
Tensor eikonal_solve(const Tensor& c, double spacing, Cell source, const EikonalOptions& opt = {});

/// Gradient with respect to c of 1/2 sum (T - T_obs)^2 over the receivers, given the residual
/// T - T_obs per receiver, by the discrete adjoint of the converged stencil.
Tensor eikonal_adjoint(const Tensor& c, double spacing, Cell source, const Tensor& t, const std::vector<Cell>& receivers,
                       const std::vector<double>& residual, const EikonalOptions& opt = {});

/// Receiver traveltimes for every source: a (sources x receivers) table.
Tensor traveltime_table(const Tensor& c, const EikonalGeometry& g, const EikonalOptions& opt = {});
/// Gradient of 1/2 ||table(c) - obs||^2 with respect to c, given the residual table.
Tensor traveltime_gradient(const Tensor& c, const EikonalGeometry& g, const Tensor& residual,
                           const EikonalOptions& opt = {});

/// Multiplicative noise T (1 + e), e ~ N(0, std^2).
constexpr double kTraveltimeNoiseStd = 0.001;
Tensor traveltime_noise(const Tensor& t, double std, std::uint64_t seed);

/// c = 100 (m + 1) / 2 + 1500 with m clamped to [-1, 1]; `clamped` receives the clamp count.
Tensor velocity_map(const Tensor& m, std::size_t* clamped = nullptr);
/// dc/dm applied to a velocity cotangent (zero where m was clamped).
Tensor velocity_map_vjp(const Tensor& m, const Tensor& gc);

}  // namespace glayers::fwd
