#include "glayers/invert/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "glayers/error.hpp"
#include "glayers/forward/imaging.hpp"
#include "glayers/forward/eikonal.hpp"

namespace glayers::inv {

ProblemKind parse_problem(const std::string& s) {
  if (s == "deblur") return ProblemKind::Deblur;
  if (s == "csmri") return ProblemKind::Csmri;
  if (s == "eikonal") return ProblemKind::Eikonal;
  fail(ErrorKind::Config, "unknown problem '" + s + "'");
}

ReparamKind parse_reparam(const std::string& s) {
  if (s == "none") return ReparamKind::None;
  if (s == "spherical") return ReparamKind::Spherical;
  if (s == "orthogonal") return ReparamKind::Orthogonal;
  if (s == "glayers") return ReparamKind::Glayers;
  fail(ErrorKind::Config, "unknown reparam '" + s + "'");
}

const char* problem_name(ProblemKind p) {
  switch (p) {
    case ProblemKind::Deblur: return "deblur";
    case ProblemKind::Csmri: return "csmri";
    case ProblemKind::Eikonal: return "eikonal";
  }
  return "?";
}

const char* reparam_name(ReparamKind r) {
  switch (r) {
    case ReparamKind::None: return "none";
    case ReparamKind::Spherical: return "spherical";
    case ReparamKind::Orthogonal: return "orthogonal";
    case ReparamKind::Glayers: return "glayers";
  }
  return "?";
}

double InversionConfig::effective_noise_std() const {
  if (!std::isnan(noise_std)) return noise_std;
  return problem == ProblemKind::Eikonal ? fwd::kTraveltimeNoiseStd : fwd::kDeblurNoiseStd;
}

double InversionConfig::inversion_blur_sigma() const {
  return std::isnan(blur_sigma_inversion) ? blur_sigma : blur_sigma_inversion;
}

void InversionConfig::validate() const {
  if (seeds.empty()) fail(ErrorKind::Config, "seeds must not be empty");
  if (!(gamma > 0.0)) fail(ErrorKind::Config, "temperature must be positive");
  if (patch.empty()) fail(ErrorKind::Config, "patch must not be empty");
  if (target != "generator" && target != "piecewise" && target != "range")
    fail(ErrorKind::Config, "target must be generator, piecewise or range");
  if (!(effective_noise_std() >= 0.0)) fail(ErrorKind::Config, "noise.std must be non-negative");
  if (!(blur_sigma > 0.0) || !(inversion_blur_sigma() > 0.0)) fail(ErrorKind::Config, "blur sigma must be positive");
  if (!(accl >= 1.0)) fail(ErrorKind::Config, "csmri.accl must be >= 1");
  if (!(eikonal_spacing > 0.0)) fail(ErrorKind::Config, "eikonal.spacing must be positive");
  if (eikonal_per_side < 1) fail(ErrorKind::Config, "eikonal.sources_per_side must be positive");
  for (const std::string* p : {&truth_path, &data_path})
    if (!p->empty() && !std::filesystem::exists(*p)) fail(ErrorKind::Config, "file not found: " + *p);
  gaussianize.validate();
  optimizer.validate();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return d;
}

long long to_int(const std::string& v) {
  std::size_t pos = 0;
  const long long i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return i;
}

std::uint64_t to_uint(const std::string& v) {
  const long long i = to_int(v);
  if (i < 0) throw std::invalid_argument(v);
  return static_cast<std::uint64_t>(i);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(v);
}

Shape to_shape(const std::string& v) {
  Shape s;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, 'x')) s.push_back(static_cast<std::size_t>(to_uint(trim(part))));
  if (s.empty()) throw std::invalid_argument(v);
  return s;
}

std::vector<std::uint64_t> to_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(to_uint(trim(part)));
  return out;
}

using Setter = std::function<void(InversionConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem", [](auto& c, auto& v) { c.problem = parse_problem(v); }},
      {"reparam", [](auto& c, auto& v) { c.reparam = parse_reparam(v); }},
      {"seeds", [](auto& c, auto& v) { c.seeds = to_seeds(v); }},
      {"temperature", [](auto& c, auto& v) { c.gamma = to_double(v); }},
      {"patch", [](auto& c, auto& v) { c.patch = to_shape(v); }},
      {"concurrent", [](auto& c, auto& v) { c.concurrent = to_bool(v); }},
      {"target", [](auto& c, auto& v) { c.target = v; }},
      {"truth_seed", [](auto& c, auto& v) { c.truth_seed = to_uint(v); }},
      {"noise_seed", [](auto& c, auto& v) { c.noise_seed = to_uint(v); }},
      {"truth", [](auto& c, auto& v) { c.truth_path = v; }},
      {"data", [](auto& c, auto& v) { c.data_path = v; }},
      {"noise.snr_db", [](auto& c, auto& v) { c.snr_db = to_double(v); }},
      {"noise.std", [](auto& c, auto& v) { c.noise_std = to_double(v); }},
      {"deblur.sigma", [](auto& c, auto& v) { c.blur_sigma = to_double(v); }},
      {"deblur.sigma_inversion", [](auto& c, auto& v) { c.blur_sigma_inversion = to_double(v); }},
      {"csmri.accl", [](auto& c, auto& v) { c.accl = to_double(v); }},
      {"csmri.center_lines", [](auto& c, auto& v) { c.center_lines = static_cast<std::size_t>(to_uint(v)); }},
      {"csmri.mask_seed", [](auto& c, auto& v) { c.mask_seed = to_uint(v); }},
      {"eikonal.sources_per_side", [](auto& c, auto& v) { c.eikonal_per_side = static_cast<std::size_t>(to_uint(v)); }},
      {"eikonal.spacing", [](auto& c, auto& v) { c.eikonal_spacing = to_double(v); }},
      {"gaussianize.eta", [](auto& c, auto& v) { c.gaussianize.eta = to_double(v); }},
      {"gaussianize.alpha", [](auto& c, auto& v) { c.gaussianize.alpha = to_double(v); }},
      {"gaussianize.max_ica", [](auto& c, auto& v) { c.gaussianize.max_ica = static_cast<int>(to_int(v)); }},
      {"gaussianize.max_inner", [](auto& c, auto& v) { c.gaussianize.max_inner = static_cast<int>(to_int(v)); }},
      {"gaussianize.tol", [](auto& c, auto& v) { c.gaussianize.tol = to_double(v); }},
      {"gaussianize.contrast", [](auto& c, auto& v) { c.gaussianize.contrast = v; }},
      {"gaussianize.whitening", [](auto& c, auto& v) { c.gaussianize.whitening = gauss::parse_whitening(v); }},
      {"gaussianize.ica", [](auto& c, auto& v) { c.gaussianize.ica = to_bool(v); }},
      {"gaussianize.yeo_johnson", [](auto& c, auto& v) { c.gaussianize.yeo_johnson = to_bool(v); }},
      {"gaussianize.lambert", [](auto& c, auto& v) { c.gaussianize.lambert = to_bool(v); }},
      {"gaussianize.roll", [](auto& c, auto& v) { c.gaussianize.roll = to_bool(v); }},
      {"optimizer.memory", [](auto& c, auto& v) { c.optimizer.memory = static_cast<int>(to_int(v)); }},
      {"optimizer.max_iter", [](auto& c, auto& v) { c.optimizer.max_iter = static_cast<int>(to_int(v)); }},
      {"optimizer.grad_tol", [](auto& c, auto& v) { c.optimizer.grad_tol = to_double(v); }},
      {"optimizer.c1", [](auto& c, auto& v) { c.optimizer.c1 = to_double(v); }},
      {"optimizer.c2", [](auto& c, auto& v) { c.optimizer.c2 = to_double(v); }},
      {"optimizer.max_linesearch", [](auto& c, auto& v) { c.optimizer.max_linesearch = static_cast<int>(to_int(v)); }},
  };
  return table;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "default";
  if (std::isinf(v)) return "inf";
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

InversionConfig parse_config(const std::string& text) {
  InversionConfig cfg;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value == "default" && (key == "noise.std" || key == "deblur.sigma_inversion")) continue;
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": bad value '" + value + "' for " + key);
    }
  }
  cfg.gaussianize.gamma = cfg.gamma;
  cfg.validate();
  return cfg;
}

InversionConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Config, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const InversionConfig& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(c.seeds[i]);
  std::string patch;
  for (std::size_t i = 0; i < c.patch.size(); ++i) patch += (i ? "x" : "") + std::to_string(c.patch[i]);
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("problem", problem_name(c.problem));
  kv("reparam", reparam_name(c.reparam));
  kv("seeds", seeds);
  kv("temperature", fmt(c.gamma));
  kv("patch", patch);
  kv("concurrent", b(c.concurrent));
  kv("target", c.target);
  kv("truth_seed", std::to_string(c.truth_seed));
  kv("noise_seed", std::to_string(c.noise_seed));
  if (!c.truth_path.empty()) kv("truth", c.truth_path);
  if (!c.data_path.empty()) kv("data", c.data_path);
  kv("noise.snr_db", fmt(c.snr_db));
  kv("noise.std", fmt(c.noise_std));
  kv("deblur.sigma", fmt(c.blur_sigma));
  kv("deblur.sigma_inversion", fmt(c.blur_sigma_inversion));
  kv("csmri.accl", fmt(c.accl));
  kv("csmri.center_lines", std::to_string(c.center_lines));
  kv("csmri.mask_seed", std::to_string(c.mask_seed));
  kv("eikonal.sources_per_side", std::to_string(c.eikonal_per_side));
  kv("eikonal.spacing", fmt(c.eikonal_spacing));
  kv("gaussianize.eta", fmt(c.gaussianize.eta));
  kv("gaussianize.alpha", fmt(c.gaussianize.alpha));
  kv("gaussianize.max_ica", std::to_string(c.gaussianize.max_ica));
  kv("gaussianize.max_inner", std::to_string(c.gaussianize.max_inner));
  kv("gaussianize.tol", fmt(c.gaussianize.tol));
  kv("gaussianize.contrast", c.gaussianize.contrast);
  kv("gaussianize.whitening", c.gaussianize.whitening == gauss::Whitening::Zca ? "zca" : "iter");
  kv("gaussianize.ica", b(c.gaussianize.ica));
  kv("gaussianize.yeo_johnson", b(c.gaussianize.yeo_johnson));
  kv("gaussianize.lambert", b(c.gaussianize.lambert));
  kv("gaussianize.roll", b(c.gaussianize.roll));
  kv("optimizer.memory", std::to_string(c.optimizer.memory));
  kv("optimizer.max_iter", std::to_string(c.optimizer.max_iter));
  kv("optimizer.grad_tol", fmt(c.optimizer.grad_tol));
  kv("optimizer.c1", fmt(c.optimizer.c1));
  kv("optimizer.c2", fmt(c.optimizer.c2));
  kv("optimizer.max_linesearch", std::to_string(c.optimizer.max_linesearch));
  return os.str();
}

}  // namespace glayers::inv
