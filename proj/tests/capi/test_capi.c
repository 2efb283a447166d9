/* C API smoke test. Compiled as C against the public header and the shared library only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "glayers/glayers.h"

static int failures = 0;

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, #cond, gl_last_error()); \
      ++failures;                                                         \
    }                                                                     \
  } while (0)

static double lcg(unsigned long long* s) {
  *s = *s * 6364136223846793005ULL + 1442695040888963407ULL;
  return (double)(*s >> 11) / 9007199254740992.0;
}

/* Roughly Gaussian samples: sum of 12 uniforms. */
static double gauss(unsigned long long* s) {
  double a = 0;
  for (int k = 0; k < 12; ++k) a += lcg(s);
  return a - 6.0;
}

static void test_tensors(const char* dir) {
  size_t dims[2] = {3, 4};
  double data[12];
  for (int i = 0; i < 12; ++i) data[i] = i * 0.5;
  gl_tensor* t = NULL;
  EXPECT(gl_tensor_create(dims, 2, data, &t) == GL_OK);
  EXPECT(gl_tensor_ndim(t) == 2);
  EXPECT(gl_tensor_size(t) == 12);
  size_t got[4] = {0};
  EXPECT(gl_tensor_dims(t, got, 4) == GL_OK);
  EXPECT(got[0] == 3 && got[1] == 4);

  char path[512];
  snprintf(path, sizeof path, "%s/capi_tensor.gtns", dir);
  EXPECT(gl_tensor_save(t, path) == GL_OK);
  gl_tensor* u = NULL;
  EXPECT(gl_tensor_load(path, &u) == GL_OK);
  double back[12];
  EXPECT(gl_tensor_copy_data(u, back, 12) == GL_OK);
  EXPECT(memcmp(back, data, sizeof data) == 0);
  EXPECT(gl_tensor_copy_data(u, back, 11) == GL_ERR_ARGUMENT);
  remove(path);

  gl_tensor* z = NULL;
  EXPECT(gl_tensor_create(dims, 2, NULL, &z) == GL_OK);
  EXPECT(gl_tensor_copy_data(z, back, 12) == GL_OK);
  EXPECT(back[0] == 0.0 && back[11] == 0.0);

  EXPECT(gl_tensor_load("/nonexistent/x.gtns", &u) == GL_ERR_IO);
  EXPECT(strlen(gl_last_error()) > 0);
  EXPECT(gl_tensor_create(dims, 2, data, NULL) == GL_ERR_ARGUMENT);
  size_t zero_dims[1] = {0};
  EXPECT(gl_tensor_create(zero_dims, 0, NULL, &u) != GL_OK);
  gl_tensor_free(t);
  gl_tensor_free(u);
  gl_tensor_free(z);
  gl_tensor_free(NULL);
}

static void test_gaussianize(void) {
  size_t dims[3] = {3, 64, 64};
  const size_t n = 3 * 64 * 64;
  double* data = malloc(n * sizeof(double));
  unsigned long long s = 42;
  for (size_t i = 0; i < n; ++i) data[i] = exp(0.5 * gauss(&s));  /* skewed input */
  gl_tensor* v = NULL;
  EXPECT(gl_tensor_create(dims, 3, data, &v) == GL_OK);

  size_t patch[3] = {1, 4, 4};
  gl_tensor* z = NULL;
  char* info = NULL;
  EXPECT(gl_gaussianize(v, patch, 3, "gaussianize.roll = true\n", &z, &info) == GL_OK);
  EXPECT(info != NULL && strstr(info, "\"rolled\": true") != NULL);
  char* diag = NULL;
  EXPECT(gl_diagnostics(z, patch, 3, 1, 1.0, &diag) == GL_OK);
  EXPECT(diag != NULL && strstr(diag, "\"gates_passed\":true") != NULL);
  gl_string_free(info);
  gl_string_free(diag);
  gl_tensor_free(z);

  EXPECT(gl_gaussianize(v, patch, 3, "gaussianize.alpha = 2\n", &z, NULL) == GL_ERR_CONFIG);
  EXPECT(gl_gaussianize(v, patch, 3, "nonsense\n", &z, NULL) == GL_ERR_CONFIG);
  size_t bad_patch[3] = {1, 5, 5};
  EXPECT(gl_gaussianize(v, bad_patch, 3, NULL, &z, NULL) == GL_ERR_SHAPE);
  EXPECT(gl_gaussianize(NULL, patch, 3, NULL, &z, NULL) == GL_ERR_ARGUMENT);
  gl_tensor_free(v);
  free(data);
}

static void test_metrics(void) {
  size_t dims[2] = {32, 32};
  double a[1024], b[1024];
  for (int i = 0; i < 1024; ++i) {
    a[i] = sin(0.1 * i);
    b[i] = a[i] + 0.1;
  }
  gl_tensor *ta = NULL, *tb = NULL;
  gl_tensor_create(dims, 2, a, &ta);
  gl_tensor_create(dims, 2, b, &tb);
  double psnr = 0, ssim = 0;
  EXPECT(gl_metrics(ta, tb, 2.0, &psnr, &ssim) == GL_OK);
  EXPECT(fabs(psnr - 10.0 * log10(4.0 / 0.01)) < 1e-9);
  EXPECT(ssim > 0.0 && ssim < 1.0);
  EXPECT(gl_metrics(ta, ta, 2.0, &psnr, &ssim) == GL_OK);
  EXPECT(psnr == 100.0);
  size_t other[2] = {16, 16};
  gl_tensor* tc = NULL;
  gl_tensor_create(other, 2, NULL, &tc);
  EXPECT(gl_metrics(ta, tc, 2.0, &psnr, &ssim) == GL_ERR_SHAPE);
  gl_tensor_free(ta);
  gl_tensor_free(tb);
  gl_tensor_free(tc);
}

static void test_invert(void) {
  char* text = NULL;
  EXPECT(gl_default_config(&text) == GL_OK);
  EXPECT(text != NULL && strstr(text, "reparam = glayers") != NULL);
  gl_string_free(text);

  const char* cfg = "problem = csmri\nseeds = 1,2\noptimizer.max_iter = 5\nconcurrent = false\n";
  char *report = NULL, *history = NULL;
  EXPECT(gl_invert(cfg, &report, &history) == GL_OK);
  EXPECT(report != NULL && strstr(report, "\"restarts\"") != NULL);
  EXPECT(history != NULL && strncmp(history, "seed,iteration,loss", 19) == 0);
  gl_string_free(report);
  gl_string_free(history);
  EXPECT(gl_invert("problem = nope\n", &report, NULL) == GL_ERR_CONFIG);
  EXPECT(strstr(gl_last_error(), "nope") != NULL);
}

static void test_gradcheck(void) {
  char* ids = NULL;
  EXPECT(gl_gradcheck_ids(&ids) == GL_OK);
  EXPECT(ids != NULL && strstr(ids, "cayley") != NULL);
  gl_string_free(ids);
  int passed = 0;
  char* table = NULL;
  EXPECT(gl_gradcheck("spherical", 1, &passed, &table) == GL_OK);
  EXPECT(passed == 1);
  EXPECT(table != NULL && strlen(table) > 0);
  gl_string_free(table);
  EXPECT(gl_gradcheck("bogus", 1, &passed, NULL) == GL_ERR_CONFIG);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  EXPECT(strlen(gl_version()) > 0);
  EXPECT(strcmp(gl_status_name(GL_ERR_CONVERGENCE), "convergence error") == 0);
  EXPECT(strcmp(gl_status_name(GL_OK), "ok") == 0);
  test_tensors(dir);
  test_gaussianize();
  test_metrics();
  test_invert();
  test_gradcheck();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
