#ifndef WPMEC_WPMEC_H
#define WPMEC_WPMEC_H

/* C interface of the wpmec solver library.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns a wpmec_status; on
 * failure wpmec_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). Strings returned through char**
 * are owned by the caller and released with wpmec_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WPMEC_API __declspec(dllexport)
#else
#define WPMEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wpmec_status {
  WPMEC_OK = 0,
  WPMEC_INVALID_ARGUMENT = 1,
  WPMEC_PARSE = 2,
  WPMEC_INFEASIBLE = 3,
  WPMEC_NUMERICAL = 4,
  WPMEC_IO = 5,
  WPMEC_INTERNAL = 6
} wpmec_status;

typedef enum wpmec_log_level {
  WPMEC_LOG_DEBUG = 0,
  WPMEC_LOG_INFO = 1,
  WPMEC_LOG_WARN = 2,
  WPMEC_LOG_ERROR = 3
} wpmec_log_level;

typedef struct wpmec_instance wpmec_instance;
typedef struct wpmec_options wpmec_options;
typedef struct wpmec_report wpmec_report;
typedef struct wpmec_sweep_config wpmec_sweep_config;
typedef struct wpmec_sweep_result wpmec_sweep_result;

typedef void (*wpmec_log_fn)(int level, const char* message, void* user);
typedef void (*wpmec_progress_fn)(int done, int total, void* user);

WPMEC_API const char* wpmec_version(void);
WPMEC_API const char* wpmec_status_name(wpmec_status status);
WPMEC_API const char* wpmec_last_error(void);
WPMEC_API void wpmec_string_free(char* s);

/* Instances */
WPMEC_API wpmec_status wpmec_instance_from_json(const char* text, wpmec_instance** out);
WPMEC_API wpmec_status wpmec_instance_load(const char* path, wpmec_instance** out);
/* Random instance drawn with the channel and arrival model of a sweep
 * config (at its K and A_max). */
WPMEC_API wpmec_status wpmec_instance_generate(const wpmec_sweep_config* cfg, uint64_t seed, wpmec_instance** out);
WPMEC_API wpmec_status wpmec_instance_to_json(const wpmec_instance* inst, char** out);
/* *ok is 1 for a clean instance; *report_json (optional) lists violations. */
WPMEC_API wpmec_status wpmec_instance_validate(const wpmec_instance* inst, int* ok, char** report_json);
WPMEC_API void wpmec_instance_free(wpmec_instance* inst);

/* Solver options; a NULL options pointer means defaults everywhere. */
WPMEC_API wpmec_status wpmec_options_create(wpmec_options** out);
/* Relative primal-dual gap at which the dual iteration stops. */
WPMEC_API wpmec_status wpmec_options_set_gap_tol(wpmec_options* opts, double gap_tol);
WPMEC_API wpmec_status wpmec_options_set_max_iter(wpmec_options* opts, long max_iter);
WPMEC_API wpmec_status wpmec_options_set_log(wpmec_options* opts, wpmec_log_fn fn, void* user);
WPMEC_API void wpmec_options_free(wpmec_options* opts);

/* Solving. scheme is one of "joint", "local-only", "full-offload",
 * "myopic", "separate". WPMEC_INFEASIBLE means the scheme cannot serve the
 * instance. */
WPMEC_API wpmec_status wpmec_solve(const wpmec_instance* inst, const char* scheme, const wpmec_options* opts,
                                   wpmec_report** out);
WPMEC_API double wpmec_report_objective(const wpmec_report* report);
WPMEC_API double wpmec_report_dual_value(const wpmec_report* report);
WPMEC_API double wpmec_report_gap(const wpmec_report* report);
WPMEC_API int wpmec_report_feasible(const wpmec_report* report);
/* Runs the KKT verifier; the result is included in later JSON output. */
WPMEC_API wpmec_status wpmec_report_check_kkt(wpmec_report* report, double* worst);
WPMEC_API wpmec_status wpmec_report_to_json(const wpmec_report* report, char** out);
WPMEC_API void wpmec_report_free(wpmec_report* report);

/* Sweeps */
WPMEC_API wpmec_status wpmec_sweep_config_default(wpmec_sweep_config** out);
WPMEC_API wpmec_status wpmec_sweep_config_from_json(const char* text, wpmec_sweep_config** out);
WPMEC_API wpmec_status wpmec_sweep_config_load(const char* path, wpmec_sweep_config** out);
WPMEC_API wpmec_status wpmec_sweep_config_set_seed(wpmec_sweep_config* cfg, uint64_t seed);
WPMEC_API wpmec_status wpmec_sweep_config_set_trials(wpmec_sweep_config* cfg, int trials);
WPMEC_API wpmec_status wpmec_sweep_config_set_threads(wpmec_sweep_config* cfg, int threads);
/* axis is "K" or "A_max". */
WPMEC_API wpmec_status wpmec_sweep_config_set_axis(wpmec_sweep_config* cfg, const char* axis, const double* values,
                                                   size_t count);
/* Copies the solver settings of opts into the config. */
WPMEC_API wpmec_status wpmec_sweep_config_set_options(wpmec_sweep_config* cfg, const wpmec_options* opts);
WPMEC_API wpmec_status wpmec_sweep_config_to_json(const wpmec_sweep_config* cfg, char** out);
WPMEC_API void wpmec_sweep_config_free(wpmec_sweep_config* cfg);

WPMEC_API wpmec_status wpmec_sweep_run(const wpmec_sweep_config* cfg, wpmec_progress_fn progress, void* user,
                                       wpmec_sweep_result** out);
WPMEC_API size_t wpmec_sweep_result_cells(const wpmec_sweep_result* result);
/* Any output pointer may be NULL. *scheme stays valid while result lives. */
WPMEC_API wpmec_status wpmec_sweep_result_cell(const wpmec_sweep_result* result, size_t index, double* axis_value,
                                               const char** scheme, double* mean_j_per_slot, double* stderr_j_per_slot,
                                               int* n_ok, int* n_infeasible);
WPMEC_API wpmec_status wpmec_sweep_result_csv(const wpmec_sweep_result* result, char** out);
/* Writes sweep.csv and sweep.svg into out_dir. */
WPMEC_API wpmec_status wpmec_sweep_result_emit(const wpmec_sweep_result* result, const char* out_dir, int log_y);
WPMEC_API void wpmec_sweep_result_free(wpmec_sweep_result* result);

#ifdef __cplusplus
}
#endif

#endif
