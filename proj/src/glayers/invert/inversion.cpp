#include "glayers/invert/inversion.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "json.hpp"

#include "glayers/error.hpp"
#include "glayers/forward/eikonal.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/invert/metrics.hpp"
#include "glayers/random.hpp"
#include "glayers/reparam/reparam.hpp"
#include "glayers/version.hpp"

namespace glayers::inv {

namespace {

constexpr std::size_t kImageSide = 4 * kLatentSide;

Shape latent_dims() { return {kLatentSide, kLatentSide}; }

}  // namespace

namespace {

ad::Var apply_reparam(ad::Var x, const InversionConfig& cfg, const gauss::PatchPartition& p, const Tensor& v_fixed) {
  switch (cfg.reparam) {
    case ReparamKind::None: return x;
    case ReparamKind::Spherical: return reparam::spherical(x, cfg.gamma);
    case ReparamKind::Orthogonal: return reparam::orthogonal_reparam(x, v_fixed, p);
    case ReparamKind::Glayers: return reparam::glayer_reparam(x, p, cfg.gaussianize);
  }
  fail(ErrorKind::Config, "unknown reparameterization");
}

}  // namespace

Tensor piecewise_image() {
  Tensor m(Shape{kImageSide, kImageSide}, -0.5);
  for (std::size_t i = 0; i < kImageSide; ++i)
    for (std::size_t j = 0; j < kImageSide; ++j) {
      double& v = m[i * kImageSide + j];
      if (i >= 8 && i < 28 && j >= 10 && j < 40) v = 0.6;
      const double di = double(i) - 44.0, dj = double(j) - 38.0;
      if (di * di + dj * dj < 12.0 * 12.0) v = -0.9;
      if (i >= 36 && i < 58 && j >= 6 && j < 16) v = 0.2;
    }
  return m;
}

ProblemSetup make_problem(const InversionConfig& cfg) {
  ProblemSetup s;
  if (!cfg.truth_path.empty()) {
    s.truth = read_gtns(cfg.truth_path);
    if (s.truth.dims() != Shape{kImageSide, kImageSide})
      fail(ErrorKind::Config, "truth image must be " + shape_string({kImageSide, kImageSide}));
  } else if (cfg.target == "piecewise") {
    s.truth = piecewise_image();
  } else if (cfg.target == "range") {
    // Truth inside the range of the reparameterization, so a noiseless fit can reach zero misfit.
    if (cfg.reparam == ReparamKind::Orthogonal)
      fail(ErrorKind::Config, "target range needs a latent-space reparam (none, spherical, glayers)");
    InversionConfig c = cfg;
    c.gaussianize.gamma = c.gamma;
    s.truth_variable = randn(latent_dims(), cfg.truth_seed);
    ad::Tape t;
    const gauss::PatchPartition p(latent_dims(), cfg.patch);
    s.truth = fwd::toy_generator(apply_reparam(t.constant(s.truth_variable), c, p, Tensor{}).value());
  } else {
    s.truth_variable = randn(latent_dims(), cfg.truth_seed);
    s.truth = fwd::toy_generator(s.truth_variable);
  }

  std::shared_ptr<const fwd::ForwardModel> sim;
  switch (cfg.problem) {
    case ProblemKind::Deblur: {
      sim = std::make_shared<fwd::BlurModel>(cfg.blur_sigma);
      s.model = std::make_shared<fwd::BlurModel>(cfg.inversion_blur_sigma());
      s.clean_data = sim->simulate(s.truth);
      s.data = fwd::add_noise_std(s.clean_data, cfg.effective_noise_std(), cfg.noise_seed);
      break;
    }
    case ProblemKind::Csmri: {
      const Tensor mask = fwd::make_mask({kImageSide, kImageSide}, cfg.accl, cfg.center_lines, cfg.mask_seed);
      sim = std::make_shared<fwd::CsmriModel>(mask);
      s.model = sim;
      s.clean_data = sim->simulate(s.truth);
      s.data = fwd::add_noise_snr_masked(s.clean_data, mask, cfg.snr_db, cfg.noise_seed);
      break;
    }
    case ProblemKind::Eikonal: {
      sim = std::make_shared<fwd::EikonalModel>(
          fwd::EikonalGeometry::square(kImageSide, cfg.eikonal_spacing, cfg.eikonal_per_side));
      s.model = sim;
      s.clean_data = sim->simulate(s.truth);
      s.data = fwd::traveltime_noise(s.clean_data, cfg.effective_noise_std(), cfg.noise_seed);
      break;
    }
  }
  if (!cfg.data_path.empty()) {
    Tensor d = read_gtns(cfg.data_path);
    if (d.dims() != s.clean_data.dims())
      fail(ErrorKind::Config, "data file dims " + shape_string(d.dims()) + " do not match " +
                                  shape_string(s.clean_data.dims()));
    s.data = std::move(d);
  }
  const Tensor noise = axpy(-1.0, s.clean_data, s.data);
  s.noise_energy = dot(noise, noise);
  return s;
}

InversionObjective::InversionObjective(const InversionConfig& cfg, std::shared_ptr<const fwd::ForwardModel> model,
                                       Tensor data, Tensor v_fixed)
    : cfg_(cfg), model_(std::move(model)), data_(std::move(data)), v_fixed_(std::move(v_fixed)),
      partition_(latent_dims(), cfg.patch) {
  cfg_.gaussianize.gamma = cfg_.gamma;
  if (cfg_.reparam == ReparamKind::Orthogonal && v_fixed_.dims() != latent_dims())
    fail(ErrorKind::Shape, "orthogonal reparameterization needs a fixed latent of dims " + shape_string(latent_dims()));
}

Shape InversionObjective::variable_dims() const {
  if (cfg_.reparam == ReparamKind::Orthogonal) return {reparam::skew_param_count(partition_.patch_dim())};
  return latent_dims();
}

gauss::PatchPartition InversionObjective::diagnostics_partition() const {
  if (cfg_.reparam == ReparamKind::Glayers) return gauss::final_partition(partition_, cfg_.gaussianize);
  return partition_;
}


Tensor InversionObjective::latent(const Tensor& x) const {
  ad::Tape t;
  return apply_reparam(t.constant(x), cfg_, partition_, v_fixed_).value();
}

Tensor InversionObjective::image(const Tensor& x) const { return fwd::toy_generator(latent(x)); }

double InversionObjective::misfit(const Tensor& m) const {
  const Tensor r = axpy(-1.0, data_, model_->simulate(m));
  return dot(r, r);
}

std::pair<double, Tensor> InversionObjective::operator()(const Tensor& x) const {
  if (x.dims() != variable_dims()) fail(ErrorKind::Shape, "objective: variable has dims " + shape_string(x.dims()));
  ad::Tape t;
  ad::Var in = t.leaf(x);
  ad::Var z = apply_reparam(in, cfg_, partition_, v_fixed_);
  const Tensor m = fwd::toy_generator(z.value());
  const Tensor r = axpy(-1.0, data_, model_->simulate(m));
  const double loss = 0.5 * dot(r, r);
  const Tensor gz = fwd::toy_generator_vjp(z.value(), model_->vjp(m, r));
  return {loss, t.backward(z, gz)[in]};
}

RestartResult run_restart(const InversionConfig& cfg, const ProblemSetup& setup, std::uint64_t seed) {
  RestartResult res;
  res.seed = seed;
  try {
    const Tensor v0 = randn(latent_dims(), seed);
    const bool ortho = cfg.reparam == ReparamKind::Orthogonal;
    InversionObjective obj(cfg, setup.model, setup.data, ortho ? v0 : Tensor{});
    const Tensor x0 = ortho ? Tensor(obj.variable_dims(), 0.0) : v0;

    int failed = 0;
    bool first = true;
    auto fg = [&](const Tensor& x) -> std::pair<double, Tensor> {
      if (first) {
        first = false;
        return obj(x);
      }
      try {
        return obj(x);
      } catch (const Error&) {
        // Trial point outside the layers' domain: reject it so the line search backs off.
        ++failed;
        return {std::numeric_limits<double>::infinity(), Tensor(x.dims(), 0.0)};
      }
    };
    opt::LbfgsResult lr = opt::lbfgs(fg, x0, cfg.optimizer);

    res.ok = true;
    res.status = lr.status;
    res.initial_loss = lr.initial_loss;
    res.final_loss = lr.loss;
    res.iterations = lr.iterations;
    res.evaluations = lr.evaluations;
    res.failed_evaluations = failed;
    res.optimizer_restarts = lr.restarts;
    res.trace = std::move(lr.trace);
    res.variable = lr.x;
    res.latent = obj.latent(lr.x);
    res.image = fwd::toy_generator(res.latent);
    res.data_misfit = obj.misfit(res.image);
    res.psnr = psnr(setup.truth, res.image);
    res.ssim = ssim(setup.truth, res.image);
    res.diagnostics = gauss::diagnostics(res.latent, obj.diagnostics_partition());
    res.gates = gauss::gates(res.diagnostics, cfg.gamma);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

InversionReport run_inversion(const InversionConfig& cfg_in) {
  const auto t0 = std::chrono::steady_clock::now();
  InversionConfig cfg = cfg_in;
  cfg.gaussianize.gamma = cfg.gamma;
  cfg.validate();
  const ProblemSetup setup = make_problem(cfg);

  InversionReport rep;
  rep.config = cfg;
  rep.noise_energy = setup.noise_energy;
  rep.data_size = setup.data.size();
  if (cfg.concurrent && cfg.seeds.size() > 1) {
    std::vector<std::future<RestartResult>> jobs;
    for (std::uint64_t s : cfg.seeds)
      jobs.push_back(std::async(std::launch::async, [&cfg, &setup, s] { return run_restart(cfg, setup, s); }));
    for (auto& j : jobs) rep.restarts.push_back(j.get());
  } else {
    for (std::uint64_t s : cfg.seeds) rep.restarts.push_back(run_restart(cfg, setup, s));
  }

  bool any = false;
  std::string errors;
  for (const RestartResult& r : rep.restarts) {
    if (!r.ok) {
      errors += " [seed " + std::to_string(r.seed) + ": " + r.error + "]";
      continue;
    }
    if (!any || r.psnr > rep.best_psnr) rep.best_psnr = r.psnr, rep.best_psnr_seed = r.seed;
    if (!any || r.ssim > rep.best_ssim) rep.best_ssim = r.ssim, rep.best_ssim_seed = r.seed;
    if (!any || r.final_loss < rep.best_loss) rep.best_loss = r.final_loss, rep.best_loss_seed = r.seed;
    any = true;
  }
  if (!any) fail(ErrorKind::Generic, "all restarts failed:" + errors);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string report_json(const InversionReport& r, bool include_wall_time) {
  using nlohmann::json;
  json j;
  j["version"] = kVersion;
  j["problem"] = problem_name(r.config.problem);
  j["reparam"] = reparam_name(r.config.reparam);
  json cfg = json::object();
  std::istringstream lines(config_to_text(r.config));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = cfg;
  j["noise_energy"] = num(r.noise_energy);
  j["data_size"] = r.data_size;
  j["penalty_term"] = InversionObjective::kHasPenalty;
  json restarts = json::array();
  for (const RestartResult& x : r.restarts) {
    json e;
    e["seed"] = x.seed;
    e["ok"] = x.ok;
    e["error"] = x.error;
    e["status"] = x.status;
    e["initial_loss"] = num(x.initial_loss);
    e["final_loss"] = num(x.final_loss);
    e["data_misfit"] = num(x.data_misfit);
    e["psnr"] = num(x.psnr);
    e["ssim"] = num(x.ssim);
    e["iterations"] = x.iterations;
    e["evaluations"] = x.evaluations;
    e["failed_evaluations"] = x.failed_evaluations;
    e["optimizer_restarts"] = x.optimizer_restarts;
    e["diagnostics"] = json::parse(gauss::diagnostics_json(x.diagnostics, x.gates));
    restarts.push_back(e);
  }
  j["restarts"] = restarts;
  j["best"] = {{"psnr", num(r.best_psnr)}, {"psnr_seed", r.best_psnr_seed}, {"ssim", num(r.best_ssim)},
               {"ssim_seed", r.best_ssim_seed}, {"loss", num(r.best_loss)}, {"loss_seed", r.best_loss_seed}};
  if (include_wall_time) j["wall_time_s"] = r.wall_time_s;
  return j.dump(2);
}

std::string history_csv(const InversionReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,iteration,loss,grad_norm,step,evaluations\n";
  for (const RestartResult& x : r.restarts) {
    if (!x.ok) continue;
    os << x.seed << ",0," << x.initial_loss << ",,,1\n";
    for (const auto& t : x.trace)
      os << x.seed << "," << t.iteration << "," << t.loss << "," << t.grad_norm << "," << t.step << ","
         << t.evaluations << "\n";
  }
  return os.str();
}

}  // namespace glayers::inv
