#ifndef BICOMP_H
#define BICOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BICOMP_BUILDING)
#    define BICOMP_API __declspec(dllexport)
#  else
#    define BICOMP_API __declspec(dllimport)
#  endif
#else
#  define BICOMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bicomp_status {
    BICOMP_OK = 0,
    BICOMP_E_INVALID_ARGUMENT = 1,
    /* scenario text or key/value rejected */
    BICOMP_E_SCENARIO = 2,
    BICOMP_E_IO = 3,
    /* simulation aborted */
    BICOMP_E_RUNTIME = 4,
    /* verify found an invariant violation */
    BICOMP_E_VALIDATION = 5,
    BICOMP_E_NOT_FOUND = 6,
    /* output buffer too small; *needed holds the required size */
    BICOMP_E_BUFFER = 7
} bicomp_status;

typedef struct bicomp_scenario bicomp_scenario;
typedef struct bicomp_result bicomp_result;

/* Message for the last failing call on this thread; never NULL. */
BICOMP_API const char* bicomp_last_error(void);
BICOMP_API const char* bicomp_version(void);
BICOMP_API const char* bicomp_status_string(bicomp_status s);

/* Scenarios. */
BICOMP_API bicomp_status bicomp_scenario_default(bicomp_scenario** out);
BICOMP_API bicomp_status bicomp_scenario_parse(const char* text, bicomp_scenario** out);
BICOMP_API bicomp_status bicomp_scenario_load(const char* path, bicomp_scenario** out);
BICOMP_API bicomp_status bicomp_scenario_clone(const bicomp_scenario* s, bicomp_scenario** out);
/* key is "section.key" or a bare key that is unique across sections. */
BICOMP_API bicomp_status bicomp_scenario_set(bicomp_scenario* s, const char* key, const char* value);
BICOMP_API bicomp_status bicomp_scenario_get(const bicomp_scenario* s, const char* key, char* buf, size_t cap,
                                             size_t* needed);
/* Canonical text, NUL terminated. needed includes the terminator. */
BICOMP_API bicomp_status bicomp_scenario_to_text(const bicomp_scenario* s, char* buf, size_t cap, size_t* needed);
BICOMP_API void bicomp_scenario_free(bicomp_scenario* s);

/* Runs. out_dir may be NULL to skip writing artifacts. */
BICOMP_API bicomp_status bicomp_run(const bicomp_scenario* s, const char* out_dir, bicomp_result** out);
BICOMP_API bicomp_status bicomp_result_metric(const bicomp_result* r, const char* name, double* value);
/* 64 hex characters plus terminator. */
BICOMP_API bicomp_status bicomp_result_trace_hash(const bicomp_result* r, char out[65]);
BICOMP_API bicomp_status bicomp_result_tip(const bicomp_result* r, char out[65]);
BICOMP_API void bicomp_result_free(bicomp_result* r);

BICOMP_API size_t bicomp_metric_count(void);
BICOMP_API const char* bicomp_metric_name(size_t i);

/* Sweeps. Writes sweep.csv and columns.csv into out_dir. */
typedef void (*bicomp_progress_fn)(size_t done, size_t total, void* user);
BICOMP_API bicomp_status bicomp_sweep(const bicomp_scenario* base, const char* const* axes, size_t n_axes,
                                      uint32_t seeds, uint32_t jobs, const char* out_dir,
                                      bicomp_progress_fn progress, void* user);

/*
 * Re-validates a trace and its sibling chain.bin. Returns BICOMP_OK when the
 * chain satisfies every invariant, BICOMP_E_VALIDATION when it does not, and
 * another code when the inputs cannot be read. report receives one problem
 * per line (may be NULL).
 */
BICOMP_API bicomp_status bicomp_verify_trace(const char* trace_path, int replay, char* report, size_t cap,
                                             size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
