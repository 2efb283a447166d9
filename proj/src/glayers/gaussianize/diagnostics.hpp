#pragma once

#include <string>
#include <vector>

#include "glayers/gaussianize/partition.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

/// Gaussianity summary of a latent. Per-patch statistics are the bias-adjusted sample skewness
/// G1 and excess kurtosis G2 of each patch column.
struct GaussianityDiagnostics {
  std::vector<double> patch_skewness;
  std::vector<double> patch_excess_kurtosis;
  double mean_skewness = 0.0;         // average of patch_skewness
  double mean_excess_kurtosis = 0.0;  // average of patch_excess_kurtosis
  double pooled_skewness = 0.0;       // all entries together
  double pooled_excess_kurtosis = 0.0;
  double max_offdiag_correlation = 0.0;  // between patch components, across patches
  double norm_ratio = 0.0;               // ||z||_2 / sqrt(n)
  bool degenerate = false;               // zero variance somewhere: moments undefined
};

GaussianityDiagnostics diagnostics(const Tensor& z, const PatchPartition& p);

/// Acceptance gates: |mean skewness| < 0.5, |mean excess kurtosis| < 1.0, max off-diagonal
/// correlation < 0.15, norm ratio within 5% of gamma. A degenerate latent fails every gate.
struct GateThresholds {
  double skewness = 0.5;
  double excess_kurtosis = 1.0;
  double correlation = 0.15;
  double norm_tolerance = 0.05;
};

struct GateReport {
  bool skewness = false;
  bool kurtosis = false;
  bool correlation = false;
  bool norm = false;
  bool all() const { return skewness && kurtosis && correlation && norm; }
  int failures() const { return !skewness + !kurtosis + !correlation + !norm; }
};

GateReport gates(const GaussianityDiagnostics& d, double gamma, const GateThresholds& t = {});

/// Flat JSON object with scalar fields only.
std::string diagnostics_json(const GaussianityDiagnostics& d, const GateReport& g);

}  // namespace glayers::gauss
