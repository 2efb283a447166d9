#include "glayers/glayers.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"

#include "glayers/error.hpp"
#include "glayers/gaussianize/diagnostics.hpp"
#include "glayers/gaussianize/pipeline.hpp"
#include "glayers/invert/config.hpp"
#include "glayers/invert/gradcheck_registry.hpp"
#include "glayers/invert/inversion.hpp"
#include "glayers/invert/metrics.hpp"
#include "glayers/tensor.hpp"
#include "glayers/version.hpp"

struct gl_tensor {
  glayers::Tensor t;
};

namespace {

thread_local std::string g_last_error;

gl_status to_status(glayers::ErrorKind k) {
  using glayers::ErrorKind;
  switch (k) {
    case ErrorKind::Generic: return GL_ERR_GENERIC;
    case ErrorKind::Config: return GL_ERR_CONFIG;
    case ErrorKind::Convergence: return GL_ERR_CONVERGENCE;
    case ErrorKind::Shape: return GL_ERR_SHAPE;
    case ErrorKind::Domain: return GL_ERR_DOMAIN;
    case ErrorKind::Numeric: return GL_ERR_NUMERIC;
    case ErrorKind::Degeneracy: return GL_ERR_DEGENERACY;
    case ErrorKind::Io: return GL_ERR_IO;
    case ErrorKind::Bracket: return GL_ERR_BRACKET;
    case ErrorKind::Evaluation: return GL_ERR_EVALUATION;
    case ErrorKind::Lookup: return GL_ERR_LOOKUP;
    case ErrorKind::Variance: return GL_ERR_VARIANCE;
  }
  return GL_ERR_GENERIC;
}

template <class F>
gl_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return GL_OK;
  } catch (const glayers::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GL_ERR_GENERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GL_ERR_GENERIC;
  } catch (...) {
    g_last_error = "unknown failure";
    return GL_ERR_GENERIC;
  }
}

gl_status bad_argument(const char* what) {
  g_last_error = what;
  return GL_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

glayers::Shape to_shape(const size_t* dims, size_t n) { return glayers::Shape(dims, dims + n); }

glayers::inv::InversionConfig parse_or_default(const char* text) {
  return text ? glayers::inv::parse_config(text) : glayers::inv::InversionConfig{};
}

}  // namespace

extern "C" {

const char* gl_version(void) { return glayers::kVersion; }
const char* gl_last_error(void) { return g_last_error.c_str(); }

const char* gl_status_name(gl_status s) {
  switch (s) {
    case GL_OK: return "ok";
    case GL_ERR_GENERIC: return "error";
    case GL_ERR_CONFIG: return "config error";
    case GL_ERR_CONVERGENCE: return "convergence error";
    case GL_ERR_SHAPE: return "shape error";
    case GL_ERR_DOMAIN: return "domain error";
    case GL_ERR_NUMERIC: return "numeric error";
    case GL_ERR_DEGENERACY: return "degeneracy error";
    case GL_ERR_IO: return "io error";
    case GL_ERR_BRACKET: return "bracket error";
    case GL_ERR_EVALUATION: return "evaluation error";
    case GL_ERR_LOOKUP: return "lookup error";
    case GL_ERR_VARIANCE: return "variance error";
    case GL_ERR_ARGUMENT: return "argument error";
  }
  return "unknown status";
}

void gl_string_free(char* s) { std::free(s); }

gl_status gl_tensor_create(const size_t* dims, size_t ndim, const double* data, gl_tensor** out) {
  if (!dims || !out || ndim == 0) return bad_argument("gl_tensor_create: null dims/out or ndim 0");
  return guarded([&] {
    glayers::Tensor t(to_shape(dims, ndim), 0.0);
    if (data) std::memcpy(t.values().data(), data, t.size() * sizeof(double));
    *out = new gl_tensor{std::move(t)};
  });
}

gl_status gl_tensor_load(const char* path, gl_tensor** out) {
  if (!path || !out) return bad_argument("gl_tensor_load: null argument");
  return guarded([&] { *out = new gl_tensor{glayers::read_gtns(path)}; });
}

gl_status gl_tensor_save(const gl_tensor* t, const char* path) {
  if (!t || !path) return bad_argument("gl_tensor_save: null argument");
  return guarded([&] { glayers::write_gtns(t->t, path); });
}

size_t gl_tensor_ndim(const gl_tensor* t) { return t ? t->t.dims().size() : 0; }
size_t gl_tensor_size(const gl_tensor* t) { return t ? t->t.size() : 0; }

gl_status gl_tensor_dims(const gl_tensor* t, size_t* dims, size_t cap) {
  if (!t || !dims) return bad_argument("gl_tensor_dims: null argument");
  const auto& d = t->t.dims();
  for (size_t i = 0; i < cap && i < d.size(); ++i) dims[i] = d[i];
  return GL_OK;
}

gl_status gl_tensor_copy_data(const gl_tensor* t, double* out, size_t n) {
  if (!t || !out) return bad_argument("gl_tensor_copy_data: null argument");
  if (n != t->t.size()) return bad_argument("gl_tensor_copy_data: size mismatch");
  std::memcpy(out, t->t.values().data(), n * sizeof(double));
  return GL_OK;
}

void gl_tensor_free(gl_tensor* t) { delete t; }

gl_status gl_gaussianize(const gl_tensor* v, const size_t* patch, size_t npatch, const char* config_text,
                         gl_tensor** out, char** info_json) {
  if (!v || !patch || !out) return bad_argument("gl_gaussianize: null argument");
  return guarded([&] {
    const auto cfg = parse_or_default(config_text);
    const glayers::gauss::PatchPartition p(v->t.dims(), to_shape(patch, npatch));
    glayers::ad::Tape tape;
    const auto r = glayers::gauss::gaussianize(tape.constant(v->t), p, cfg.gaussianize);
    nlohmann::json info = nlohmann::json::array();
    for (const auto& pass : r.passes)
      info.push_back({{"lambda", pass.lambda},
                      {"delta", pass.delta},
                      {"ica_iterations", pass.ica_iterations},
                      {"igmm_iterations", pass.igmm_iterations},
                      {"lambert_skipped", pass.lambert_skipped}});
    std::unique_ptr<gl_tensor> res(new gl_tensor{r.output.value()});
    if (info_json) *info_json = dup_string(nlohmann::json{{"passes", info}, {"rolled", cfg.gaussianize.roll}, {"gamma", cfg.gaussianize.gamma}}.dump(2));
    *out = res.release();
  });
}

gl_status gl_diagnostics(const gl_tensor* z, const size_t* patch, size_t npatch, int rolled, double gamma,
                         char** json) {
  if (!z || !patch || !json) return bad_argument("gl_diagnostics: null argument");
  return guarded([&] {
    glayers::gauss::PatchPartition p(z->t.dims(), to_shape(patch, npatch));
    if (rolled) p = p.with_half_patch_roll();
    const auto d = glayers::gauss::diagnostics(z->t, p);
    *json = dup_string(glayers::gauss::diagnostics_json(d, glayers::gauss::gates(d, gamma)));
  });
}

gl_status gl_metrics(const gl_tensor* ref, const gl_tensor* test, double peak, double* psnr, double* ssim) {
  if (!ref || !test) return bad_argument("gl_metrics: null argument");
  return guarded([&] {
    const double p = glayers::inv::psnr(ref->t, test->t, peak);
    const double s = glayers::inv::ssim(ref->t, test->t, peak);
    if (psnr) *psnr = p;
    if (ssim) *ssim = s;
  });
}

gl_status gl_default_config(char** text) {
  if (!text) return bad_argument("gl_default_config: null argument");
  return guarded([&] { *text = dup_string(glayers::inv::config_to_text(glayers::inv::InversionConfig{})); });
}

gl_status gl_invert(const char* config_text, char** report_json, char** history_csv) {
  if (!config_text) return bad_argument("gl_invert: null config");
  return guarded([&] {
    const auto rep = glayers::inv::run_inversion(glayers::inv::parse_config(config_text));
    char* r = report_json ? dup_string(glayers::inv::report_json(rep)) : nullptr;
    if (history_csv) *history_csv = dup_string(glayers::inv::history_csv(rep));
    if (report_json) *report_json = r;
  });
}

gl_status gl_gradcheck_ids(char** ids) {
  if (!ids) return bad_argument("gl_gradcheck_ids: null argument");
  return guarded([&] {
    std::string s;
    for (const auto& id : glayers::inv::gradcheck_ids()) s += id + "\n";
    *ids = dup_string(s);
  });
}

gl_status gl_gradcheck(const char* id, uint64_t seed, int* passed, char** table) {
  if (!id || !passed) return bad_argument("gl_gradcheck: null argument");
  return guarded([&] {
    const auto r = glayers::inv::run_gradcheck(id, seed);
    *passed = r.pass ? 1 : 0;
    if (table) *table = dup_string(r.table());
  });
}

}  // extern "C"
