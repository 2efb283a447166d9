#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "glayers/forward/model.hpp"
#include "glayers/gaussianize/diagnostics.hpp"
#include "glayers/gaussianize/partition.hpp"
#include "glayers/invert/config.hpp"
#include "glayers/optimize/optimize.hpp"
#include "glayers/tensor.hpp"

namespace glayers::inv {

constexpr std::size_t kLatentSide = 16;

/// Ground truth and observed data for one configuration.
struct ProblemSetup {
  Tensor truth;       // model image m*
  Tensor clean_data;  // f(m*)
  Tensor data;        // observed
  double noise_energy = 0.0;  // ||data - clean_data||^2
  std::shared_ptr<const fwd::ForwardModel> model;  // operator used for inversion
  Tensor truth_variable;  // latent draw behind a generated target (empty for files and piecewise)
};

/// Hand-drawn piecewise-constant 64 x 64 image in (-1, 1).
Tensor piecewise_image();

ProblemSetup make_problem(const InversionConfig& cfg);

/// 1/2 ||d - f(g(h(x)))||^2 where h is the configured reparameterization. The optimization variable x is
/// v (none, spherical, glayers) or the skew parameters of the Cayley rotation (orthogonal). There is no
/// penalty term.
class InversionObjective {
 public:
  InversionObjective(const InversionConfig& cfg, std::shared_ptr<const fwd::ForwardModel> model, Tensor data,
                     Tensor v_fixed = {});

  Shape variable_dims() const;
  Tensor latent(const Tensor& x) const;
  Tensor image(const Tensor& x) const;
  std::pair<double, Tensor> operator()(const Tensor& x) const;
  /// Data misfit ||f(m) - d||^2 of a model image.
  double misfit(const Tensor& m) const;

  const gauss::PatchPartition& partition() const { return partition_; }
  /// Partition on which the latent diagnostics are measured.
  gauss::PatchPartition diagnostics_partition() const;

  static constexpr bool kHasPenalty = false;

 private:
  InversionConfig cfg_;
  std::shared_ptr<const fwd::ForwardModel> model_;
  Tensor data_;
  Tensor v_fixed_;
  gauss::PatchPartition partition_;
};

struct RestartResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string status;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double data_misfit = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int failed_evaluations = 0;
  int optimizer_restarts = 0;
  gauss::GaussianityDiagnostics diagnostics;
  gauss::GateReport gates;
  std::vector<opt::IterationRecord> trace;
  Tensor variable;
  Tensor latent;
  Tensor image;
};

struct InversionReport {
  InversionConfig config;
  double noise_energy = 0.0;
  std::size_t data_size = 0;
  std::vector<RestartResult> restarts;
  double best_psnr = 0.0, best_ssim = 0.0, best_loss = 0.0;
  std::uint64_t best_psnr_seed = 0, best_ssim_seed = 0, best_loss_seed = 0;
  double wall_time_s = 0.0;
};

/// One restart from v0 ~ N(0, I) drawn with `seed`.
RestartResult run_restart(const InversionConfig& cfg, const ProblemSetup& setup, std::uint64_t seed);

/// All seeds (concurrently when cfg.concurrent), best value per metric selected independently.
/// Throws when every restart fails.
InversionReport run_inversion(const InversionConfig& cfg);

std::string report_json(const InversionReport& r, bool include_wall_time = true);
std::string history_csv(const InversionReport& r);

}  // namespace glayers::inv
