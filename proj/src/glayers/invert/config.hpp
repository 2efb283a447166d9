#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/optimize/optimize.hpp"
#include "glayers/tensor.hpp"

namespace glayers::inv {

enum class ProblemKind { Deblur, Csmri, Eikonal };
enum class ReparamKind { None, Spherical, Orthogonal, Glayers };

ProblemKind parse_problem(const std::string& s);
ReparamKind parse_reparam(const std::string& s);
const char* problem_name(ProblemKind p);
const char* reparam_name(ReparamKind r);

/// Run configuration. Text form is one `key = value` per line; `#` starts a comment.
struct InversionConfig {
  ProblemKind problem = ProblemKind::Deblur;
  ReparamKind reparam = ReparamKind::Glayers;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double gamma = 1.0;
  Shape patch{2, 2};
  // second pass on the half-patch rolled partition, so patch seams get whitened too
  gauss::GaussianizeConfig gaussianize = [] {
    gauss::GaussianizeConfig g;
    g.roll = true;
    return g;
  }();
  opt::LbfgsConfig optimizer;
  bool concurrent = true;

  std::string target = "generator";  // generator | piecewise | range (truth = g(h(v*)))
  std::uint64_t truth_seed = 0;
  std::uint64_t noise_seed = 1000;
  std::string truth_path;  // optional GTNS model image (overrides target)
  std::string data_path;   // optional GTNS observed data (overrides simulation)

  double snr_db = 20.0;  // csmri
  double noise_std = std::numeric_limits<double>::quiet_NaN();  // deblur additive / eikonal relative
  double blur_sigma = 3.0;
  double blur_sigma_inversion = std::numeric_limits<double>::quiet_NaN();  // defaults to blur_sigma
  double accl = 4.0;
  std::size_t center_lines = 8;
  std::uint64_t mask_seed = 7;
  std::size_t eikonal_per_side = 4;
  double eikonal_spacing = 0.004;

  /// Noise std in effect for the problem (defaults applied).
  double effective_noise_std() const;
  double inversion_blur_sigma() const;
  void validate() const;
};

/// Parses config text. Unknown keys and malformed values raise config errors naming the line.
InversionConfig parse_config(const std::string& text);
InversionConfig load_config(const std::string& path);

/// Every documented key with its resolved value, as `key = value` lines (parseable by parse_config).
std::string config_to_text(const InversionConfig& cfg);

}  // namespace glayers::inv
