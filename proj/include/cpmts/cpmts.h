// Copyright 2026 The cpmts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the cpmts library. All handles are opaque; every call that
 * can fail returns a cpmts_status and leaves a message for
 * cpmts_last_error() on the calling thread.
 *
 * Matrices cross the boundary as column-major doubles. Series data is laid
 * out one observation after another, each observation as vec(Y_t) (column
 * stacking), i.e. a pq x n column-major block.
 *
 * JSON strings returned through `char**` are owned by the caller and must be
 * released with cpmts_string_free. */

#ifndef CPMTS_CPMTS_H
#define CPMTS_CPMTS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CPMTS_BUILDING)
#define CPMTS_API __declspec(dllexport)
#else
#define CPMTS_API __declspec(dllimport)
#endif
#else
#define CPMTS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpmts_status {
  CPMTS_OK = 0,
  CPMTS_INVALID_ARGUMENT = 1,
  CPMTS_NUMERICAL = 2,
  CPMTS_NOT_IDENTIFIABLE = 3,
  CPMTS_BUFFER_TOO_SMALL = 4,
  CPMTS_INTERNAL = 5
} cpmts_status;

typedef struct cpmts_series cpmts_series;
typedef struct cpmts_estimate cpmts_estimate;
typedef struct cpmts_forecast cpmts_forecast;
typedef struct cpmts_simulation cpmts_simulation;

CPMTS_API const char* cpmts_version(void);
CPMTS_API const char* cpmts_status_name(cpmts_status status);
/* Message of the last failed call on this thread; "" when none. */
CPMTS_API const char* cpmts_last_error(void);
CPMTS_API void cpmts_string_free(char* s);

/* ---- series ---- */

/* `data` holds n * p * q values (see the layout note above). */
CPMTS_API cpmts_status cpmts_series_create(int64_t n, int64_t p, int64_t q, const double* data,
                                           cpmts_series** out);
CPMTS_API void cpmts_series_free(cpmts_series* series);
CPMTS_API cpmts_status cpmts_series_shape(const cpmts_series* series, int64_t* n, int64_t* p,
                                          int64_t* q);
/* Copies n * p * q values into `out` (capacity in doubles). */
CPMTS_API cpmts_status cpmts_series_data(const cpmts_series* series, double* out,
                                         size_t capacity);

/* ---- estimation ---- */

/* `config_json` may be NULL or "{}". Recognized keys: K, Ktilde, delta1,
 * delta2, c1, c2, c3 (number or "auto"), seed, pin_ranks ([d1, d2, d]),
 * jd_max_iter, jd_tol. Unknown keys are rejected. */
CPMTS_API cpmts_status cpmts_estimate_run(const cpmts_series* series, const char* config_json,
                                          cpmts_estimate** out);
CPMTS_API void cpmts_estimate_free(cpmts_estimate* est);
CPMTS_API cpmts_status cpmts_estimate_ranks(const cpmts_estimate* est, int64_t* d1, int64_t* d2,
                                            int64_t* d);
/* Named matrices: "A", "B", "P", "Q", "W", "U", "V", "theta". With out ==
 * NULL only the shape is reported. */
CPMTS_API cpmts_status cpmts_estimate_matrix(const cpmts_estimate* est, const char* name,
                                             double* out, size_t capacity, int64_t* rows,
                                             int64_t* cols);
/* Diagnostics document, "schema": 1. */
CPMTS_API cpmts_status cpmts_estimate_diagnostics(const cpmts_estimate* est, char** json);

/* ---- forecasting ---- */

/* method: "unified", "latent" or "latent-substitute". `est` must come from
 * the same series. Fails with CPMTS_NOT_IDENTIFIABLE for "latent" when the
 * loadings are not identified. */
CPMTS_API cpmts_status cpmts_forecast_run(const cpmts_series* series, const cpmts_estimate* est,
                                          const char* method, int64_t h, int64_t max_order,
                                          cpmts_forecast** out);
CPMTS_API void cpmts_forecast_free(cpmts_forecast* fc);
CPMTS_API cpmts_status cpmts_forecast_horizon(const cpmts_forecast* fc, int64_t* h);
/* Step 1..h prediction, p x q column-major. */
CPMTS_API cpmts_status cpmts_forecast_prediction(const cpmts_forecast* fc, int64_t step,
                                                 double* out, size_t capacity);
/* Method, VAR order, AIC values and latent forecasts. */
CPMTS_API cpmts_status cpmts_forecast_info(const cpmts_forecast* fc, char** json);

/* ---- simulation ---- */

/* Keys: scenario ("R1" | "R2" | "R3"), n, p, q, d, seed, noise_scale. */
CPMTS_API cpmts_status cpmts_simulate(const char* scenario_json, cpmts_simulation** out);
CPMTS_API void cpmts_simulation_free(cpmts_simulation* sim);
/* A new series handle holding the simulated observations. */
CPMTS_API cpmts_status cpmts_simulation_series(const cpmts_simulation* sim, cpmts_series** out);
/* Named matrices: "A", "B", "P", "Q", "U", "V", "x" (n x d factors),
 * "signal" (pq x n), "ar" (d x 1). */
CPMTS_API cpmts_status cpmts_simulation_matrix(const cpmts_simulation* sim, const char* name,
                                               double* out, size_t capacity, int64_t* rows,
                                               int64_t* cols);

/* ---- benchmarks ---- */

/* Rank-recovery and loading-error replications. `scenario_json` adds
 * "replications" to the simulate keys; `estimator_json` is as for
 * cpmts_estimate_run. Result: summary and per-replication records. */
CPMTS_API cpmts_status cpmts_bench_replications(const char* scenario_json,
                                                const char* estimator_json, int jobs,
                                                char** json);
/* One-step (or h-step) RMSE over m rolling windows. `methods` is a comma
 * list of unified, latent, latent-substitute, oracle. */
CPMTS_API cpmts_status cpmts_bench_forecast(const char* scenario_json, const char* estimator_json,
                                            const char* methods, int64_t m, int64_t h, int jobs,
                                            int64_t max_order, char** json);

/* ---- metrics ---- */

/* Max over columns a of A of min over columns ah of Ahat of 1 - (ah'a)^2.
 * Both inputs column-major with unit columns. */
CPMTS_API cpmts_status cpmts_varpi(const double* a, int64_t rows, int64_t cols, const double* ahat,
                                   int64_t cols_hat, double* out);

#ifdef __cplusplus
}
#endif

#endif /* CPMTS_CPMTS_H */
