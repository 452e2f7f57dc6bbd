#ifndef OLYMP_OLYMP_H
#define OLYMP_OLYMP_H

#include <stddef.h>

#if defined(_WIN32)
#define OLYMP_API __declspec(dllexport)
#else
#define OLYMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum olymp_status {
    OLYMP_OK = 0,
    OLYMP_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad size, undersized buffer */
    OLYMP_ERR_USAGE = 2,            /* unknown command, missing required key */
    OLYMP_ERR_PARSE = 3,            /* malformed input file */
    OLYMP_ERR_DOMAIN = 4,           /* values outside a function's domain */
    OLYMP_ERR_STATE = 5,            /* call out of order (e.g. predicting with an unfitted model) */
    OLYMP_ERR_NONCONVERGENCE = 6,
    OLYMP_ERR_INTERNAL = 7
} olymp_status;

typedef struct olymp_session olymp_session;
typedef struct olymp_model olymp_model;

OLYMP_API const char* olymp_version(void);
OLYMP_API const char* olymp_status_string(olymp_status status);

/* JSON {"error": {...}} describing the last failure on this thread, or "" after a success. */
OLYMP_API const char* olymp_last_error(void);

/* A session holds a flat dotted-key configuration and the last run's report. */
OLYMP_API olymp_status olymp_session_create(olymp_session** out);
OLYMP_API void olymp_session_destroy(olymp_session* session);
/* Merges "key = value" lines from a file; later loads and sets override earlier ones. */
OLYMP_API olymp_status olymp_session_load_config(olymp_session* session, const char* path);
OLYMP_API olymp_status olymp_session_set(olymp_session* session, const char* key, const char* value);
/* *value stays valid until the session is next modified; NULL when the key is unset. */
OLYMP_API olymp_status olymp_session_get(const olymp_session* session, const char* key, const char** value);

/* Runs one subcommand, writing its tables, figures, report.json and manifest.json into out_dir. */
OLYMP_API olymp_status olymp_run(olymp_session* session, const char* command, const char* out_dir);
/* Report JSON of the last successful run, "" before any. */
OLYMP_API const char* olymp_session_report(const olymp_session* session);

OLYMP_API size_t olymp_command_count(void);
OLYMP_API const char* olymp_command_name(size_t index);

OLYMP_API olymp_status olymp_hybrid_similarity(const char* a, const char* b, double* out);
/* Successor code under the builtin regime table, NUL-terminated into buf. */
OLYMP_API olymp_status olymp_map_entity(const char* name, int year, char* buf, size_t buf_size);
OLYMP_API olymp_status olymp_compose_effect(double individual, double synergy, double legacy, double w_synergy,
                                            double w_legacy, double* out);
/* Weighted PageRank over n nodes and m edges src[k] -> dst[k]; scores has n slots. */
OLYMP_API olymp_status olymp_pagerank(size_t n, size_t m, const size_t* src, const size_t* dst, const double* weight,
                                      double damping, double* scores);

OLYMP_API olymp_status olymp_model_load(const char* path, olymp_model** out);
OLYMP_API olymp_status olymp_model_save(const olymp_model* model, const char* path);
OLYMP_API olymp_status olymp_model_shape(const olymp_model* model, int* features, int* hidden, size_t* parameters);
OLYMP_API void olymp_model_destroy(olymp_model* model);

#ifdef __cplusplus
}
#endif

#endif
