/* glayers C interface. All functions return a gl_status; on failure gl_last_error() describes it.
 * Strings handed out by the library are freed with gl_string_free, tensors with gl_tensor_free. */
#ifndef GLAYERS_GLAYERS_H
#define GLAYERS_GLAYERS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_ERR_GENERIC = 1,
  GL_ERR_CONFIG = 2,
  GL_ERR_CONVERGENCE = 3,
  GL_ERR_SHAPE = 4,
  GL_ERR_DOMAIN = 5,
  GL_ERR_NUMERIC = 6,
  GL_ERR_DEGENERACY = 7,
  GL_ERR_IO = 8,
  GL_ERR_BRACKET = 9,
  GL_ERR_EVALUATION = 10,
  GL_ERR_LOOKUP = 11,
  GL_ERR_VARIANCE = 12,
  GL_ERR_ARGUMENT = 13 /* null pointer or bad argument at the C boundary */
} gl_status;

typedef struct gl_tensor gl_tensor;

const char* gl_version(void);
/* Message of the last failure on the calling thread ("" if none). Valid until the next call. */
const char* gl_last_error(void);
const char* gl_status_name(gl_status s);
void gl_string_free(char* s);

/* Tensors: dense row-major doubles. */
gl_status gl_tensor_create(const size_t* dims, size_t ndim, const double* data, gl_tensor** out);
gl_status gl_tensor_load(const char* path, gl_tensor** out);
gl_status gl_tensor_save(const gl_tensor* t, const char* path);
size_t gl_tensor_ndim(const gl_tensor* t);
size_t gl_tensor_size(const gl_tensor* t);
/* Copies min(cap, ndim) extents. */
gl_status gl_tensor_dims(const gl_tensor* t, size_t* dims, size_t cap);
/* Copies exactly gl_tensor_size(t) values; n must match. */
gl_status gl_tensor_copy_data(const gl_tensor* t, double* out, size_t n);
void gl_tensor_free(gl_tensor* t);

/* Gaussianize v with the given patch extents. config_text uses the run-config syntax
 * ("gaussianize.<key> = value", "temperature = g"); NULL means defaults. info_json (optional)
 * receives fitted per-pass quantities, the temperature and whether the last pass was rolled. */
gl_status gl_gaussianize(const gl_tensor* v, const size_t* patch, size_t npatch, const char* config_text,
                         gl_tensor** out, char** info_json);

/* Gaussianity diagnostics and gate verdicts of z as JSON. rolled != 0 measures on the
 * half-patch rolled partition. */
gl_status gl_diagnostics(const gl_tensor* z, const size_t* patch, size_t npatch, int rolled, double gamma,
                         char** json);

gl_status gl_metrics(const gl_tensor* ref, const gl_tensor* test, double peak, double* psnr, double* ssim);

/* Default run configuration text. */
gl_status gl_default_config(char** text);
/* Multi-start inversion. report_json and history_csv are optional outputs. */
gl_status gl_invert(const char* config_text, char** report_json, char** history_csv);

/* Newline-separated list of gradcheck ids. */
gl_status gl_gradcheck_ids(char** ids);
/* Gradient check; *passed is set to 1 or 0, table (optional) receives the printed report. */
gl_status gl_gradcheck(const char* id, uint64_t seed, int* passed, char** table);

#ifdef __cplusplus
}
#endif

#endif
