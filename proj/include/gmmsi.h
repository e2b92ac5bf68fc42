#ifndef GMMSI_H
#define GMMSI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GMMSI_API __declspec(dllexport)
#else
#define GMMSI_API __attribute__((visibility("default")))
#endif

/* Status codes. Nonzero values match the core error categories. */
typedef enum gmmsi_status {
  GMMSI_OK = 0,
  GMMSI_E_INVALID_INPUT = 1,
  GMMSI_E_DIMENSION = 2,
  GMMSI_E_MODEL = 3,
  GMMSI_E_CONFIG = 4,
  GMMSI_E_IO = 5,
  GMMSI_E_UNSUPPORTED = 6,
  GMMSI_E_UNDEFINED = 7,
  GMMSI_E_INTERNAL = 99
} gmmsi_status;

typedef struct gmmsi_model gmmsi_model;
typedef struct gmmsi_kernel gmmsi_kernel;
typedef struct gmmsi_geometry gmmsi_geometry;
typedef struct gmmsi_sweep gmmsi_sweep;
typedef struct gmmsi_string gmmsi_string;

/* Message of the last failed call on this thread ("" if none). */
GMMSI_API const char* gmmsi_last_error(void);
/* Machine-readable name such as "E_CONFIG". */
GMMSI_API const char* gmmsi_status_name(gmmsi_status status);
GMMSI_API const char* gmmsi_version(void);

GMMSI_API const char* gmmsi_string_data(const gmmsi_string* s);
GMMSI_API size_t gmmsi_string_size(const gmmsi_string* s);
GMMSI_API void gmmsi_string_free(gmmsi_string* s);

/* Writes through a temporary file and rename. */
GMMSI_API gmmsi_status gmmsi_write_file_atomic(const char* path, const char* data, size_t size);

/* Models */
GMMSI_API gmmsi_status gmmsi_model_load(const char* path, gmmsi_model** out);
GMMSI_API gmmsi_status gmmsi_model_parse(const char* json_text, gmmsi_model** out);
/* name: "two_signal" (four-component model), "gauss334", or "random". */
GMMSI_API gmmsi_status gmmsi_model_preset(const char* name, uint64_t seed, gmmsi_model** out);
GMMSI_API gmmsi_status gmmsi_model_serialize(const gmmsi_model* model, gmmsi_string** out);
GMMSI_API gmmsi_status gmmsi_model_save(const gmmsi_model* model, const char* path);
GMMSI_API gmmsi_status gmmsi_model_dims(const gmmsi_model* model, int* n1, int* n2, int* k1, int* k2);
GMMSI_API gmmsi_status gmmsi_model_sample(const gmmsi_model* model, uint64_t seed, uint64_t index,
                                          int* i, int* k, double* x, size_t x_len);
GMMSI_API void gmmsi_model_free(gmmsi_model* model);

/* Kernels. Matrices are row-major. policy: "gaussian" or "identity2". */
GMMSI_API gmmsi_status gmmsi_kernel_draw(int m1, int n1, int m2, int n2, const char* policy,
                                         uint64_t seed, uint64_t index, gmmsi_kernel** out);
GMMSI_API gmmsi_status gmmsi_kernel_create(const double* phi1, int m1, int n1, const double* phi2,
                                           int m2, int n2, gmmsi_kernel** out);
GMMSI_API gmmsi_status gmmsi_kernel_dims(const gmmsi_kernel* kernel, int* m1, int* m2);
GMMSI_API gmmsi_status gmmsi_kernel_observe(const gmmsi_kernel* kernel, const double* x, size_t x_len,
                                            double sigma2, uint64_t seed, uint64_t index, double* y,
                                            size_t y_len);
GMMSI_API void gmmsi_kernel_free(gmmsi_kernel* kernel);

/* Geometry */
GMMSI_API gmmsi_status gmmsi_geometry_compute(const gmmsi_model* model, gmmsi_geometry** out);
GMMSI_API gmmsi_status gmmsi_geometry_components_csv(const gmmsi_geometry* geo, gmmsi_string** out);
GMMSI_API gmmsi_status gmmsi_geometry_pairs_csv(const gmmsi_geometry* geo, gmmsi_string** out);
/* Labels i, k are one-based. */
GMMSI_API gmmsi_status gmmsi_projected_rank(const gmmsi_geometry* geo, int i, int k, int m1, int m2,
                                            int* rank);
GMMSI_API void gmmsi_geometry_free(gmmsi_geometry* geo);

typedef struct gmmsi_verdict {
  char outcome[32];
  char theorem[40];
  int case_branch;
  int binding[4]; /* one-based i, k, j, l; zeros when absent */
  double d;
} gmmsi_verdict;

/* tag: one of the four classification theorem tags. */
GMMSI_API gmmsi_status gmmsi_classification_verdict(const gmmsi_geometry* geo, int m1, int m2,
                                                    const char* tag, gmmsi_verdict* out);
/* tag: gaussian, gmm_sufficient, gmm_necessary, dist_gaussian, dist_gmm_sufficient,
   dist_gmm_necessary. */
GMMSI_API gmmsi_status gmmsi_reconstruction_verdict(const gmmsi_geometry* geo, int m1, int m2,
                                                    const char* tag, int* transition,
                                                    int binding[2]);
/* Verdict CSV over the rectangle [m1_lo, m1_hi] x [m2_lo, m2_hi]. */
GMMSI_API gmmsi_status gmmsi_verdict_table(const gmmsi_geometry* geo, const char* tag, int m1_lo,
                                           int m1_hi, int m2_lo, int m2_hi, gmmsi_string** out);
/* mode: "side_info" or "distributed". */
GMMSI_API gmmsi_status gmmsi_diversity(const gmmsi_geometry* geo, int m1, int m2, const char* mode,
                                       double* d);
GMMSI_API gmmsi_status gmmsi_diversity_csv(const gmmsi_geometry* geo, int m1, int m2, const char* mode,
                                           gmmsi_string** out);

/* Decoding. y has m1 + m2 entries; labels are one-based. */
GMMSI_API gmmsi_status gmmsi_classify(const gmmsi_model* model, const gmmsi_kernel* kernel,
                                      const double* y, size_t y_len, double sigma2, const char* mode,
                                      int* i, int* k);
/* estimator: "gmm_cme" or "classify_reconstruct"; target: "x1" or "x". */
GMMSI_API gmmsi_status gmmsi_reconstruct(const gmmsi_model* model, const gmmsi_kernel* kernel,
                                         const double* y, size_t y_len, double sigma2,
                                         const char* estimator, const char* target, double* out,
                                         size_t out_len);
GMMSI_API gmmsi_status gmmsi_perr_bound(const gmmsi_model* model, const gmmsi_kernel* kernel,
                                        double sigma2, const char* mode, double* value);
GMMSI_API gmmsi_status gmmsi_mse_lower_bound(const gmmsi_model* model, const gmmsi_kernel* kernel,
                                             double sigma2, const char* target, double* value);

/* Sweeps */
typedef struct gmmsi_sweep_config {
  const char* task; /* classify_si, classify_dc, reconstruct_si, reconstruct_dc */
  int m1;
  int m2;
  double sigma2_hi;
  double sigma2_lo;
  int points_per_decade;
  int64_t trials;
  uint64_t seed;
  const char* kernel; /* gaussian or identity2 */
  int freeze_kernel;
  int64_t min_errors;
} gmmsi_sweep_config;

typedef struct gmmsi_sweep_point {
  double sigma2;
  int64_t trials;
  double value;
  double lo;
  double hi;
  double se;
  int64_t errors;
  double bound;
  double mse_cr;
  double mse_y1;
  double mse_lb;
  double mmse_gauss; /* NaN for mixtures */
} gmmsi_sweep_point;

GMMSI_API void gmmsi_sweep_config_default(gmmsi_sweep_config* cfg);
/* sigma2 may be NULL, in which case the grid comes from the config. */
GMMSI_API gmmsi_status gmmsi_sweep_run(const gmmsi_model* model, const gmmsi_sweep_config* cfg,
                                       const double* sigma2, size_t n_sigma2, gmmsi_sweep** out);
GMMSI_API size_t gmmsi_sweep_size(const gmmsi_sweep* sweep);
GMMSI_API gmmsi_status gmmsi_sweep_point_at(const gmmsi_sweep* sweep, size_t index,
                                            gmmsi_sweep_point* out);
GMMSI_API gmmsi_status gmmsi_sweep_slope(const gmmsi_sweep* sweep, double decades, double* slope);
GMMSI_API gmmsi_status gmmsi_sweep_flat(const gmmsi_sweep* sweep, double decades, int* flat);
GMMSI_API gmmsi_status gmmsi_sweep_csv(const gmmsi_sweep* sweep, gmmsi_string** out);
GMMSI_API void gmmsi_sweep_free(gmmsi_sweep* sweep);

/* Region maps. probe may be NULL; probe->sigma2 values are taken from
   sigma2_hi down to sigma2_lo. */
GMMSI_API gmmsi_status gmmsi_region_map(const gmmsi_model* model, const gmmsi_geometry* geo, int m1_lo,
                                        int m1_hi, int m2_lo, int m2_hi, const char* const* tags,
                                        size_t n_tags, const gmmsi_sweep_config* probe,
                                        gmmsi_string** out);

#ifdef __cplusplus
}
#endif

#endif
