#include "glayers/gaussianize/pipeline.hpp"

#include <cmath>

#include "glayers/error.hpp"
#include "glayers/gaussianize/ica.hpp"
#include "glayers/gaussianize/lambert.hpp"
#include "glayers/gaussianize/standardize.hpp"
#include "glayers/gaussianize/whiten.hpp"
#include "glayers/gaussianize/yeo_johnson.hpp"

namespace glayers::gauss {

void GaussianizeConfig::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::Config, "gaussianize: eta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "gaussianize: alpha must lie in (0, 1)");
  if (max_ica < 1) fail(ErrorKind::Config, "gaussianize: J must be at least 1");
  if (max_inner < 1) fail(ErrorKind::Config, "gaussianize: K must be at least 1");
  if (!(tol > 0.0)) fail(ErrorKind::Config, "gaussianize: tolerance must be positive");
  if (contrast != "logcosh") fail(ErrorKind::Config, "gaussianize: unknown contrast '" + contrast + "'");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorKind::Config, "gaussianize: temperature must be positive");
  if (!shared_1d) fail(ErrorKind::Config, "gaussianize: per-component 1D fitting is not supported");
}

Whitening parse_whitening(const std::string& s) {
  if (s == "zca") return Whitening::Zca;
  if (s == "iter" || s == "iterative") return Whitening::Iterative;
  fail(ErrorKind::Config, "unknown whitening mode '" + s + "'");
}

const char* whitening_name(Whitening w) { return w == Whitening::Zca ? "zca" : "iterative"; }

namespace {

ad::Var single_pass(ad::Var v, const PatchPartition& p, const GaussianizeConfig& cfg, PassInfo& info) {
  ad::Var m = p.partition(v);
  m = cfg.whitening == Whitening::Zca ? zca_whiten(m, cfg.eta)
                                      : iterative_whiten(m, cfg.eta, cfg.tol, cfg.max_inner);
  if (cfg.ica) {
    IcaOptions io{cfg.alpha, cfg.max_ica, cfg.max_inner, cfg.tol};
    IcaResult r = ica_layer(m, io);
    m = r.output;
    info.ica_iterations = r.outer_iterations;
  }
  const Shape mat_dims = m.dims();
  ad::Var flat = ad::reshape(m, Shape{m.size()});
  if (cfg.yeo_johnson) {
    YeoJohnsonResult r = yeo_johnson_layer(flat);
    flat = r.output;
    info.lambda = r.lambda;
  }
  if (cfg.lambert) {
    LambertResult r = lambert_layer(flat, LambertOptions{cfg.tol, cfg.max_inner});
    flat = r.output;
    info.delta = r.delta;
    info.igmm_iterations = r.iterations;
    info.lambert_skipped = r.skipped;
  }
  flat = standardize(flat, cfg.gamma);
  return p.assemble(ad::reshape(flat, mat_dims));
}

}  // namespace

GaussianizeResult gaussianize(ad::Var v, const PatchPartition& p, const GaussianizeConfig& cfg) {
  cfg.validate();
  if (v.dims() != p.tensor_dims())
    fail(ErrorKind::Shape, "gaussianize: tensor " + shape_string(v.dims()) + " does not match partition " +
                               shape_string(p.tensor_dims()));
  GaussianizeResult res;
  PassInfo info;
  ad::Var z = single_pass(v, p, cfg, info);
  res.passes.push_back(info);
  if (cfg.roll) {
    PassInfo second;
    z = single_pass(z, p.with_half_patch_roll(), cfg, second);
    res.passes.push_back(second);
  }
  res.output = z;
  return res;
}

Tensor gaussianize(const Tensor& v, const PatchPartition& p, const GaussianizeConfig& cfg) {
  ad::Tape t;
  return gaussianize(t.constant(v), p, cfg).output.value();
}

PatchPartition final_partition(const PatchPartition& p, const GaussianizeConfig& cfg) {
  return cfg.roll ? p.with_half_patch_roll() : p;
}

Stage pipeline_stage(const PatchPartition& p, const GaussianizeConfig& cfg) {
  return make_stage("pipeline", [p, cfg](ad::Var v) { return gaussianize(v, p, cfg).output; });
}

}  // namespace glayers::gauss
