#include "glayers/forward/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "glayers/error.hpp"
#include "glayers/random.hpp"

namespace glayers::fwd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_velocity(const Tensor& c) {
  if (c.rank() != 2) fail(ErrorKind::Shape, "eikonal: velocity must be a 2D grid");
  for (double v : c.values())
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Domain, "eikonal: velocity must be positive and finite");
}

double radius_m(const EikonalOptions& opt, const Tensor& c, double h) {
  if (opt.source_radius > 0.0) return opt.source_radius;
  return kSourceRadiusFraction * static_cast<double>(std::max(c.dims()[0], c.dims()[1])) * h;
}

// Cells inside the exact-initialization disc.
std::vector<char> init_mask(std::size_t rows, std::size_t cols, double h, Cell s, double radius) {
  std::vector<char> fixed(rows * cols, 0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double di = (double(i) - double(s.i)) * h, dj = (double(j) - double(s.j)) * h;
      if (std::sqrt(di * di + dj * dj) <= radius + 1e-12 * h) fixed[i * cols + j] = 1;
    }
  return fixed;
}

double source_distance(Cell a, std::size_t i, std::size_t j, double h) {
  const double di = (double(i) - double(a.i)) * h, dj = (double(j) - double(a.j)) * h;
  return std::sqrt(di * di + dj * dj);
}

struct Upwind {
  long a = -1, b = -1;  // chosen vertical / horizontal neighbour (flat index) or -1
  double ta = kInf, tb = kInf;
};

Upwind upwind(const std::vector<double>& t, std::size_t rows, std::size_t cols, std::size_t i, std::size_t j) {
  Upwind u;
  auto consider = [&](long idx, long& best, double& tbest) {
    if (t[idx] < tbest) {
      tbest = t[idx];
      best = idx;
    }
  };
  if (i > 0) consider(long((i - 1) * cols + j), u.a, u.ta);
  if (i + 1 < rows) consider(long((i + 1) * cols + j), u.a, u.ta);
  if (j > 0) consider(long(i * cols + j - 1), u.b, u.tb);
  if (j + 1 < cols) consider(long(i * cols + j + 1), u.b, u.tb);
  return u;
}

// Godunov local solve: min T with (T - a)_+^2 + (T - b)_+^2 = f^2.
double local_solve(double a, double b, double f) {
  if (std::abs(a - b) >= f) return std::min(a, b) + f;
  return 0.5 * (a + b + std::sqrt(2.0 * f * f - (a - b) * (a - b)));
}

}  // namespace

EikonalGeometry EikonalGeometry::square(std::size_t n, double spacing, std::size_t per_side) {
  if (n < 4 || per_side < 1 || per_side > n) fail(ErrorKind::Config, "eikonal geometry: invalid size");
  if (!(spacing > 0.0)) fail(ErrorKind::Config, "eikonal geometry: spacing must be positive");
  EikonalGeometry g;
  g.rows = g.cols = n;
  g.spacing = spacing;
  const std::size_t last = n - 1;
  auto side_cells = [&](int side) {
    std::vector<Cell> cells;
    for (std::size_t k = 0; k < n; ++k) {
      switch (side) {
        case 0: cells.push_back({0, k}); break;
        case 1: cells.push_back({last, k}); break;
        case 2: cells.push_back({k, 0}); break;
        default: cells.push_back({k, last}); break;
      }
    }
    return cells;
  };
  for (int side = 0; side < 4; ++side) {
    for (std::size_t s = 0; s < per_side; ++s) {
      const std::size_t k = (2 * s + 1) * n / (2 * per_side);
      Cell src = side == 0 ? Cell{0, k} : side == 1 ? Cell{last, k} : side == 2 ? Cell{k, 0} : Cell{k, last};
      std::vector<Cell> rec;
      for (int other = 0; other < 4; ++other) {
        if (other == side) continue;
        for (Cell c : side_cells(other))
          if (std::find(rec.begin(), rec.end(), c) == rec.end()) rec.push_back(c);
      }
      g.sources.push_back(src);
      g.receivers.push_back(std::move(rec));
    }
  }
  return g;
}

std::size_t EikonalGeometry::data_count() const {
  std::size_t n = 0;
  for (const auto& r : receivers) n += r.size();
  return n;
}

Tensor eikonal_solve(const Tensor& c, double h, Cell source, const EikonalOptions& opt) {
  check_velocity(c);
  const std::size_t rows = c.dims()[0], cols = c.dims()[1];
  if (source.i >= rows || source.j >= cols) fail(ErrorKind::Domain, "eikonal: source outside the grid");
  if (!(h > 0.0)) fail(ErrorKind::Domain, "eikonal: spacing must be positive");
  const double cs = c[source.i * cols + source.j];
  const std::vector<char> fixed = init_mask(rows, cols, h, source, radius_m(opt, c, h));

  std::vector<double> t(rows * cols, kInf);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (fixed[i * cols + j]) t[i * cols + j] = source_distance(source, i, j, h) / cs;

  auto visit = [&](std::size_t i, std::size_t j, double& max_change, bool& newly_reached) {
    const std::size_t k = i * cols + j;
    if (fixed[k]) return;
    const Upwind u = upwind(t, rows, cols, i, j);
    if (std::isinf(u.ta) && std::isinf(u.tb)) return;
    const double cand = local_solve(u.ta, u.tb, h / c[k]);
    if (cand < t[k]) {
      if (std::isinf(t[k])) newly_reached = true;
      else max_change = std::max(max_change, t[k] - cand);
      t[k] = cand;
    }
  };

  for (int round = 0; round < opt.max_rounds; ++round) {
    double max_change = 0.0;
    bool newly_reached = false;
    for (int dir = 0; dir < 4; ++dir) {
      const bool idown = dir == 1 || dir == 2, jdown = dir >= 2;
      for (std::size_t a = 0; a < rows; ++a) {
        const std::size_t i = idown ? rows - 1 - a : a;
        for (std::size_t b = 0; b < cols; ++b) visit(i, jdown ? cols - 1 - b : b, max_change, newly_reached);
      }
    }
    const double tmax = *std::max_element(t.begin(), t.end());
    if (!newly_reached && std::isfinite(tmax) && max_change <= opt.rel_tol * tmax)
      return Tensor(c.dims(), std::move(t));
  }
  fail(ErrorKind::Convergence, "eikonal: fast sweeping did not converge in " + std::to_string(opt.max_rounds) +
                                   " rounds");
}

Tensor eikonal_adjoint(const Tensor& c, double h, Cell source, const Tensor& t, const std::vector<Cell>& receivers,
                       const std::vector<double>& residual, const EikonalOptions& opt) {
  check_velocity(c);
  require_same_dims(c, t, "eikonal_adjoint");
  if (receivers.size() != residual.size()) fail(ErrorKind::Shape, "eikonal_adjoint: one residual per receiver");
  const std::size_t rows = c.dims()[0], cols = c.dims()[1];
  const std::size_t src = source.i * cols + source.j;
  const double cs = c[src];
  const std::vector<char> fixed = init_mask(rows, cols, h, source, radius_m(opt, c, h));

  std::vector<double> lam(rows * cols, 0.0);
  for (std::size_t r = 0; r < receivers.size(); ++r) lam[receivers[r].i * cols + receivers[r].j] += residual[r];

  std::vector<std::size_t> order(rows * cols);
  std::iota(order.begin(), order.end(), 0);
  const std::vector<double>& tv = t.storage();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return tv[x] > tv[y]; });

  Tensor grad(c.dims(), 0.0);
  for (std::size_t k : order) {
    if (lam[k] == 0.0) continue;
    const std::size_t i = k / cols, j = k % cols;
    if (fixed[k]) {
      grad[src] += lam[k] * (-source_distance(source, i, j, h) / (cs * cs));
      continue;
    }
    const Upwind u = upwind(tv, rows, cols, i, j);
    const double f = h / c[k];
    const double tk = tv[k];
    double da = 0.0, db = 0.0, df = 0.0;
    if (std::abs(u.ta - u.tb) >= f || std::isinf(u.ta) || std::isinf(u.tb)) {
      // One-sided update through the smaller neighbour.
      if (u.ta <= u.tb) da = 1.0;
      else db = 1.0;
      df = 1.0;
    } else {
      const double den = (tk - u.ta) + (tk - u.tb);
      da = (tk - u.ta) / den;
      db = (tk - u.tb) / den;
      df = f / den;
    }
    if (da != 0.0) lam[static_cast<std::size_t>(u.a)] += lam[k] * da;
    if (db != 0.0) lam[static_cast<std::size_t>(u.b)] += lam[k] * db;
    grad[k] += lam[k] * df * (-h / (c[k] * c[k]));
  }
  return grad;
}

Tensor traveltime_table(const Tensor& c, const EikonalGeometry& g, const EikonalOptions& opt) {
  if (c.dims() != Shape{g.rows, g.cols}) fail(ErrorKind::Shape, "traveltime: velocity grid does not match geometry");
  const std::size_t ns = g.sources.size();
  std::size_t nr = g.receivers.empty() ? 0 : g.receivers[0].size();
  for (const auto& r : g.receivers)
    if (r.size() != nr) fail(ErrorKind::Shape, "traveltime: receiver counts must agree across sources");
  Tensor table(Shape{ns, nr});
  for (std::size_t s = 0; s < ns; ++s) {
    const Tensor t = eikonal_solve(c, g.spacing, g.sources[s], opt);
    for (std::size_t r = 0; r < nr; ++r) table[s * nr + r] = t[g.receivers[s][r].i * g.cols + g.receivers[s][r].j];
  }
  return table;
}

Tensor traveltime_gradient(const Tensor& c, const EikonalGeometry& g, const Tensor& residual,
                           const EikonalOptions& opt) {
  const std::size_t ns = g.sources.size();
  const std::size_t nr = g.receivers.empty() ? 0 : g.receivers[0].size();
  if (residual.dims() != Shape{ns, nr}) fail(ErrorKind::Shape, "traveltime_gradient: residual table has wrong dims");
  Tensor grad(c.dims(), 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    const Tensor t = eikonal_solve(c, g.spacing, g.sources[s], opt);
    std::vector<double> r(residual.data() + s * nr, residual.data() + (s + 1) * nr);
    grad = axpy(1.0, eikonal_adjoint(c, g.spacing, g.sources[s], t, g.receivers[s], r, opt), grad);
  }
  return grad;
}

Tensor traveltime_noise(const Tensor& t, double std, std::uint64_t seed) {
  if (!(std >= 0.0)) fail(ErrorKind::Domain, "traveltime noise: std must be non-negative");
  Tensor out = t;
  if (std == 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, std);
  for (double& v : out.values()) v *= 1.0 + nd(rng);
  return out;
}

Tensor velocity_map(const Tensor& m, std::size_t* clamped) {
  Tensor c(m.dims());
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = m[i];
    if (v < -1.0 || v > 1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++count;
    }
    c[i] = 100.0 * (v + 1.0) / 2.0 + 1500.0;
  }
  if (clamped) *clamped = count;
  return c;
}

Tensor velocity_map_vjp(const Tensor& m, const Tensor& gc) {
  require_same_dims(m, gc, "velocity_map_vjp");
  Tensor g(m.dims());
  for (std::size_t i = 0; i < m.size(); ++i) g[i] = (m[i] < -1.0 || m[i] > 1.0) ? 0.0 : 50.0 * gc[i];
  return g;
}

}  // namespace glayers::fwd
