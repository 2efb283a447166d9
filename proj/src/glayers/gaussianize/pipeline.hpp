#pragma once

#include <string>
#include <vector>

#include "glayers/autodiff.hpp"
#include "glayers/gaussianize/partition.hpp"
#include "glayers/stage.hpp"
#include "glayers/tensor.hpp"

namespace glayers::gauss {

enum class Whitening { Zca, Iterative };

struct GaussianizeConfig {
  double eta = 1e-4;        // covariance blend
  double alpha = 0.8;       // ICA damping
  int max_ica = 10;         // J
  int max_inner = 100;      // K: decorrelation / Newton-Schulz / IGMM cap
  double tol = 1e-5;        // fixed-point tolerance
  std::string contrast = "logcosh";
  Whitening whitening = Whitening::Zca;
  bool ica = true;
  bool yeo_johnson = true;
  bool lambert = true;
  double gamma = 1.0;       // temperature
  bool roll = false;        // second pass on the half-patch rolled partition
  bool shared_1d = true;    // one lambda and one delta for all entries

  /// Throws a config error naming the first invalid field.
  void validate() const;
};

Whitening parse_whitening(const std::string& s);
const char* whitening_name(Whitening w);

/// Fitted quantities of one pass.
struct PassInfo {
  double lambda = 1.0;
  double delta = 0.0;
  int ica_iterations = 0;
  int igmm_iterations = 0;
  bool lambert_skipped = true;
};

struct GaussianizeResult {
  ad::Var output;
  std::vector<PassInfo> passes;
};

/// partition -> whiten -> ICA -> Yeo-Johnson -> Lambert -> standardize -> assemble, repeated once on
/// the rolled partition when cfg.roll is set. Disabled stages are the identity.
GaussianizeResult gaussianize(ad::Var v, const PatchPartition& p, const GaussianizeConfig& cfg);
Tensor gaussianize(const Tensor& v, const PatchPartition& p, const GaussianizeConfig& cfg);

/// Partition of the last pass: the rolled one when cfg.roll is set. Diagnostics use this geometry.
PatchPartition final_partition(const PatchPartition& p, const GaussianizeConfig& cfg);

/// The pipeline as a Stage over tensors of the partition's dims.
Stage pipeline_stage(const PatchPartition& p, const GaussianizeConfig& cfg);

}  // namespace glayers::gauss
