#include "glayers/gaussianize/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace glayers::gauss {

namespace {

struct Shape3 {
  double g1, g2;
  bool ok;
};

// Bias-adjusted sample skewness and excess kurtosis.
Shape3 adjusted_moments(const double* x, std::size_t count, std::size_t stride) {
  const double n = static_cast<double>(count);
  double mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) mean += x[i * stride];
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = x[i * stride] - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 1e-300) || count < 4) return {0.0, 0.0, false};
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  const double big_g1 = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  const double big_g2 = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  return {big_g1, big_g2, true};
}

}  // namespace

GaussianityDiagnostics diagnostics(const Tensor& z, const PatchPartition& p) {
  GaussianityDiagnostics d;
  d.norm_ratio = norm2(z) / std::sqrt(static_cast<double>(z.size()));
  for (double v : z.values())
    if (!std::isfinite(v)) {
      d.degenerate = true;
      return d;
    }

  const Tensor v = p.partition(z);
  const std::size_t dim = v.rows(), count = v.cols();
  for (std::size_t j = 0; j < count; ++j) {
    const Shape3 s = adjusted_moments(v.data() + j, dim, count);
    if (!s.ok) d.degenerate = true;
    d.patch_skewness.push_back(s.g1);
    d.patch_excess_kurtosis.push_back(s.g2);
    d.mean_skewness += s.g1;
    d.mean_excess_kurtosis += s.g2;
  }
  d.mean_skewness /= static_cast<double>(count);
  d.mean_excess_kurtosis /= static_cast<double>(count);

  const Shape3 pooled = adjusted_moments(z.data(), z.size(), 1);
  if (!pooled.ok) d.degenerate = true;
  d.pooled_skewness = pooled.g1;
  d.pooled_excess_kurtosis = pooled.g2;

  // Correlation between patch components (rows of V) across patches.
  if (count >= 2) {
    RowMatrix c = v.mat();
    c.colwise() -= c.rowwise().mean();
    const RowMatrix cov = c * c.transpose();
    double worst = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      if (!(cov(a, a) > 1e-300)) d.degenerate = true;
      for (std::size_t b = a + 1; b < dim; ++b) {
        const double r = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
        if (std::isfinite(r)) worst = std::max(worst, std::abs(r));
      }
    }
    d.max_offdiag_correlation = worst;
  }
  return d;
}

GateReport gates(const GaussianityDiagnostics& d, double gamma, const GateThresholds& t) {
  GateReport g;
  if (d.degenerate) return g;
  g.skewness = std::abs(d.mean_skewness) < t.skewness;
  g.kurtosis = std::abs(d.mean_excess_kurtosis) < t.excess_kurtosis;
  g.correlation = d.max_offdiag_correlation < t.correlation;
  g.norm = std::abs(d.norm_ratio - gamma) <= t.norm_tolerance * gamma;
  return g;
}

std::string diagnostics_json(const GaussianityDiagnostics& d, const GateReport& g) {
  nlohmann::json j;
  j["mean_skewness"] = d.mean_skewness;
  j["mean_excess_kurtosis"] = d.mean_excess_kurtosis;
  j["pooled_skewness"] = d.pooled_skewness;
  j["pooled_excess_kurtosis"] = d.pooled_excess_kurtosis;
  j["max_offdiag_correlation"] = d.max_offdiag_correlation;
  j["norm_ratio"] = d.norm_ratio;
  j["degenerate"] = d.degenerate;
  j["gate_skewness"] = g.skewness;
  j["gate_kurtosis"] = g.kurtosis;
  j["gate_correlation"] = g.correlation;
  j["gate_norm"] = g.norm;
  j["gates_passed"] = g.all();
  return j.dump();
}

}  // namespace glayers::gauss
