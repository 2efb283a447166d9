// glayers command line. Talks to the library only through the C interface.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glayers/glayers.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;

int exit_code(gl_status s) {
  switch (s) {
    case GL_OK: return kExitOk;
    case GL_ERR_CONFIG:
    case GL_ERR_ARGUMENT: return kExitConfig;
    case GL_ERR_CONVERGENCE: return kExitConvergence;
    default: return kExitOther;
  }
}

int report(gl_status s, const char* what) {
  if (s != GL_OK) std::cerr << "glayers " << what << ": " << gl_status_name(s) << ": " << gl_last_error() << "\n";
  return exit_code(s);
}

// Owns a library string.
struct LibString {
  char* p = nullptr;
  ~LibString() { gl_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct TensorHandle {
  gl_tensor* p = nullptr;
  ~TensorHandle() { gl_tensor_free(p); }
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return static_cast<bool>(out);
}

// "4x4" or "1x4x4"
bool parse_patch(const std::string& s, std::vector<size_t>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) return false;
    out.push_back(std::stoul(tok));
  }
  return !out.empty();
}

int cmd_invert(const std::string& config, const std::string& out, const std::string& history, bool print_config) {
  if (print_config) {
    LibString text;
    const gl_status s = gl_default_config(&text.p);
    if (s == GL_OK) std::cout << text.str();
    return report(s, "invert");
  }
  std::string cfg;
  if (!read_file(config, cfg)) {
    std::cerr << "glayers invert: cannot read config '" << config << "'\n";
    return kExitConfig;
  }
  LibString rep, hist;
  const gl_status s = gl_invert(cfg.c_str(), &rep.p, history.empty() ? nullptr : &hist.p);
  if (s != GL_OK) return report(s, "invert");
  if (out.empty() || out == "-") {
    std::cout << rep.str() << "\n";
  } else if (!write_file(out, rep.str() + "\n")) {
    std::cerr << "glayers invert: cannot write '" << out << "'\n";
    return kExitOther;
  }
  if (!history.empty() && !write_file(history, hist.str())) {
    std::cerr << "glayers invert: cannot write '" << history << "'\n";
    return kExitOther;
  }
  return kExitOk;
}

int cmd_gaussianize(const std::string& in, const std::string& out, const std::string& patch_s,
                    const std::string& config, const std::string& overrides, const std::string& diag_out) {
  std::vector<size_t> patch;
  if (!parse_patch(patch_s, patch)) {
    std::cerr << "glayers gaussianize: bad patch '" << patch_s << "' (expected e.g. 4x4)\n";
    return kExitConfig;
  }
  std::string cfg;
  if (!config.empty() && !read_file(config, cfg)) {
    std::cerr << "glayers gaussianize: cannot read config '" << config << "'\n";
    return kExitConfig;
  }
  cfg += "\n" + overrides;  // later lines win
  TensorHandle v, z;
  gl_status s = gl_tensor_load(in.c_str(), &v.p);
  if (s != GL_OK) return report(s, "gaussianize");
  LibString info;
  s = gl_gaussianize(v.p, patch.data(), patch.size(), cfg.c_str(), &z.p, &info.p);
  if (s != GL_OK) return report(s, "gaussianize");
  s = gl_tensor_save(z.p, out.c_str());
  if (s != GL_OK) return report(s, "gaussianize");
  std::cout << info.str() << "\n";
  if (!diag_out.empty()) {
    // Measure on the partition of the last pass.
    const bool rolled = info.str().find("\"rolled\": true") != std::string::npos;
    double gamma = 1.0;
    const auto g = info.str().find("\"gamma\": ");
    if (g != std::string::npos) gamma = std::strtod(info.str().c_str() + g + 9, nullptr);
    LibString diag;
    s = gl_diagnostics(z.p, patch.data(), patch.size(), rolled ? 1 : 0, gamma, &diag.p);
    if (s != GL_OK) return report(s, "gaussianize");
    if (!write_file(diag_out, diag.str() + "\n")) return kExitOther;
  }
  return kExitOk;
}

int cmd_gradcheck(const std::vector<std::string>& ids_in, bool all, bool list, uint64_t seed) {
  LibString ids;
  gl_status s = gl_gradcheck_ids(&ids.p);
  if (s != GL_OK) return report(s, "gradcheck");
  if (list) {
    std::cout << ids.str();
    return kExitOk;
  }
  std::vector<std::string> run = ids_in;
  if (all) {
    run.clear();
    std::stringstream ss(ids.str());
    for (std::string id; std::getline(ss, id);) run.push_back(id);
  }
  if (run.empty()) {
    std::cerr << "glayers gradcheck: give --id or --all\n";
    return kExitConfig;
  }
  bool ok = true;
  for (const auto& id : run) {
    int passed = 0;
    LibString table;
    s = gl_gradcheck(id.c_str(), seed, &passed, &table.p);
    if (s != GL_OK) return report(s, "gradcheck");
    std::cout << table.str();
    ok = ok && passed;
  }
  return ok ? kExitOk : kExitOther;
}

int cmd_metrics(const std::string& ref, const std::string& test, double peak) {
  TensorHandle a, b;
  gl_status s = gl_tensor_load(ref.c_str(), &a.p);
  if (s == GL_OK) s = gl_tensor_load(test.c_str(), &b.p);
  double p = 0.0, q = 0.0;
  if (s == GL_OK) s = gl_metrics(a.p, b.p, peak, &p, &q);
  if (s != GL_OK) return report(s, "metrics");
  std::printf("{\"psnr\": %.17g, \"ssim\": %.17g}\n", p, q);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glayers: Gaussianization layers for latent-space inversion"};
  app.set_version_flag("--version", gl_version());
  app.require_subcommand(1);

  std::string config, out, history;
  bool print_config = false;
  auto* inv = app.add_subcommand("invert", "multi-start inversion; writes a JSON report");
  inv->add_option("--config", config, "run config (key = value lines)");
  inv->add_option("--out", out, "report path (default stdout)");
  inv->add_option("--history", history, "per-iteration CSV path");
  inv->add_flag("--print-config", print_config, "print the default config and exit");

  std::string g_in, g_out, g_patch = "4x4", g_config, g_diag;
  auto* gz = app.add_subcommand("gaussianize", "gaussianize a GTNS tensor");
  gz->add_option("--in", g_in, "input tensor")->required();
  gz->add_option("--out", g_out, "output tensor")->required();
  gz->add_option("--patch", g_patch, "patch extents, e.g. 4x4 or 1x4x4");
  gz->add_option("--config", g_config, "config with gaussianize.* keys");
  gz->add_option("--diagnostics", g_diag, "write diagnostics JSON of the output");
  std::string g_temp, g_whiten;
  bool g_no_ica = false, g_no_yj = false, g_no_lambert = false, g_roll = false;
  gz->add_option("--temp", g_temp, "temperature gamma");
  gz->add_option("--whiten", g_whiten, "zca | iter")->check(CLI::IsMember({"zca", "iter"}));
  gz->add_flag("--no-ica", g_no_ica, "skip ICA");
  gz->add_flag("--no-yj", g_no_yj, "skip Yeo-Johnson");
  gz->add_flag("--no-lambert", g_no_lambert, "skip Lambert");
  gz->add_flag("--roll", g_roll, "second pass on the half-patch rolled partition");

  std::vector<std::string> gc_ids;
  bool gc_all = false, gc_list = false;
  uint64_t gc_seed = 1;
  auto* gc = app.add_subcommand("gradcheck", "Taylor-remainder gradient check of a stage or objective");
  gc->add_option("--id", gc_ids, "stage or problem id (repeatable)");
  gc->add_option("--seed", gc_seed, "seed");
  gc->add_flag("--all", gc_all, "run every registered id");
  gc->add_flag("--list", gc_list, "list ids");

  std::string m_ref, m_test;
  double m_peak = 2.0;
  auto* mt = app.add_subcommand("metrics", "PSNR and SSIM of two images");
  mt->add_option("--ref", m_ref, "reference image")->required();
  mt->add_option("--test", m_test, "test image")->required();
  mt->add_option("--peak", m_peak, "dynamic range (2 for [-1, 1] images)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (inv->parsed()) {
    if (config.empty() && !print_config) {
      std::cerr << "glayers invert: --config is required\n";
      return kExitConfig;
    }
    return cmd_invert(config, out, history, print_config);
  }
  if (gz->parsed()) {
    std::string ov;
    if (!g_temp.empty()) ov += "temperature = " + g_temp + "\n";
    if (!g_whiten.empty()) ov += "gaussianize.whitening = " + g_whiten + "\n";
    if (g_no_ica) ov += "gaussianize.ica = false\n";
    if (g_no_yj) ov += "gaussianize.yeo_johnson = false\n";
    if (g_no_lambert) ov += "gaussianize.lambert = false\n";
    if (g_roll) ov += "gaussianize.roll = true\n";
    return cmd_gaussianize(g_in, g_out, g_patch, g_config, ov, g_diag);
  }
  if (gc->parsed()) return cmd_gradcheck(gc_ids, gc_all, gc_list, gc_seed);
  if (mt->parsed()) return cmd_metrics(m_ref, m_test, m_peak);
  return kExitConfig;
}
