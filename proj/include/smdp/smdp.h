/* C interface to the SMDP solver toolkit.
 *
 * Functions return SMDP_ERROR_OK (0) or a negative error code. After a
 * failure, smdp_last_error() returns a message for the calling thread.
 * Output buffers follow one convention: *len carries the buffer size in and
 * the required size (including the terminating NUL for text) out; a short
 * buffer yields SMDP_ERROR_INSUFFICIENT_BUFFER. Passing buf = NULL queries
 * the size. */
#ifndef SMDP_H
#define SMDP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SMDP_BUILDING_LIBRARY)
#define SMDP_API __attribute__((visibility("default")))
#else
#define SMDP_API
#endif

enum smdp_error_code {
  SMDP_ERROR_OK = 0,
  SMDP_ERROR_NULL_POINTER = -1,
  SMDP_ERROR_INVALID_ARGUMENT = -2,
  SMDP_ERROR_INVALID_RATES = -3,
  SMDP_ERROR_NON_STOCHASTIC_ROW = -4,
  SMDP_ERROR_BUFFER_TOO_SMALL = -5,
  SMDP_ERROR_OUT_OF_RANGE = -6,
  SMDP_ERROR_NON_POSITIVE_RATE = -7,
  SMDP_ERROR_INVALID_SUPPORT = -8,
  SMDP_ERROR_DIMENSION_MISMATCH = -9,
  SMDP_ERROR_MISSING_SERVICE_ENTRY = -10,
  SMDP_ERROR_NO_CONVERGENCE = -11,
  SMDP_ERROR_REDUCIBLE_CHAIN = -12,
  SMDP_ERROR_SCHEMA = -13,
  SMDP_ERROR_NUMERIC = -14,
  SMDP_ERROR_CHECK_FAILED = -15,
  SMDP_ERROR_INSUFFICIENT_BUFFER = -16,
  SMDP_ERROR_INVALID_PROBABILITY = -17,
  SMDP_ERROR_INTERNAL = -99
};

typedef struct smdp_config smdp_config_t;
typedef struct smdp_result smdp_result_t;

typedef struct smdp_run_options {
  unsigned threads;  /* 0 or 1: single-threaded */
  int simulate;      /* sweep only: nonzero adds simulated throughput */
} smdp_run_options_t;

SMDP_API const char* smdp_version(void);
SMDP_API const char* smdp_error_description(int code);
SMDP_API const char* smdp_last_error(void);

SMDP_API int smdp_config_parse(smdp_config_t** out, const char* json, size_t len);
SMDP_API int smdp_config_load(smdp_config_t** out, const char* path);
SMDP_API int smdp_config_destroy(smdp_config_t* config);
SMDP_API int smdp_config_set_gamma(smdp_config_t* config, double gamma);
SMDP_API int smdp_config_set_tol(smdp_config_t* config, double tol);
SMDP_API int smdp_config_set_seed(smdp_config_t* config, uint64_t seed);
SMDP_API int smdp_config_hash(const smdp_config_t* config, char* buf, size_t* len);
SMDP_API int smdp_config_canonical_json(const smdp_config_t* config, char* buf, size_t* len);

/* command: "solve", "sweep", "simulate" or "check". options may be NULL.
 * A check whose proven properties fail still produces a result; its status
 * is SMDP_ERROR_CHECK_FAILED. */
SMDP_API int smdp_run(smdp_result_t** out, const smdp_config_t* config, const char* command,
                      const smdp_run_options_t* options);
SMDP_API int smdp_result_destroy(smdp_result_t* result);
SMDP_API int smdp_result_status(const smdp_result_t* result, int* status);
SMDP_API int smdp_result_json(const smdp_result_t* result, char* buf, size_t* len);
SMDP_API int smdp_result_csv(const smdp_result_t* result, char* buf, size_t* len);
SMDP_API int smdp_result_hash(const smdp_result_t* result, char* buf, size_t* len);
/* *count carries capacity in and the number of values out. */
SMDP_API int smdp_result_values(const smdp_result_t* result, double* values, size_t* count);
SMDP_API int smdp_result_threshold_count(const smdp_result_t* result, size_t* count);
SMDP_API int smdp_result_threshold(const smdp_result_t* result, size_t index, char* label, size_t* label_len,
                                   int* threshold);

#ifdef __cplusplus
}
#endif

#endif
