#include "olymp/olymp.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: CHECK(%s)\n", __FILE__, __LINE__, #cond); \
            ++failures;                                              \
        }                                                            \
    } while (0)

static const char* env_or(const char* name, const char* fallback) {
    const char* v = getenv(name);
    return v && *v ? v : fallback;
}

static void test_pure_functions(void) {
    double s = 0.0;
    CHECK(olymp_hybrid_similarity("Kenya", "Kenya", &s) == OLYMP_OK);
    CHECK(s == 1.0);
    CHECK(olymp_hybrid_similarity("Kenya", NULL, &s) == OLYMP_ERR_INVALID_ARGUMENT);
    CHECK(strstr(olymp_last_error(), "invalid_argument") != NULL);

    char code[8];
    CHECK(olymp_map_entity("URS", 1992, code, sizeof code) == OLYMP_OK);
    CHECK(strcmp(code, "RUS") == 0);
    CHECK(olymp_map_entity("URS", 1988, code, sizeof code) == OLYMP_OK);
    CHECK(strcmp(code, "URS") == 0);
    CHECK(olymp_map_entity("URS", 1992, code, 3) == OLYMP_ERR_INVALID_ARGUMENT);
    CHECK(olymp_map_entity("URS", 1700, code, sizeof code) == OLYMP_ERR_DOMAIN);
    CHECK(strstr(olymp_last_error(), "domain_error") != NULL);

    double effect = 0.0;
    CHECK(olymp_compose_effect(2.15, 3.42, 1.28, 0.7, 0.5, &effect) == OLYMP_OK);
    CHECK(fabs(effect - 5.184) < 1e-12);
    CHECK(olymp_last_error()[0] == '\0');

    /* 3-cycle: uniform stationary distribution */
    size_t src[] = {0, 1, 2}, dst[] = {1, 2, 0};
    double w[] = {1.0, 1.0, 1.0}, scores[3];
    CHECK(olymp_pagerank(3, 3, src, dst, w, 0.85, scores) == OLYMP_OK);
    for (int i = 0; i < 3; ++i) CHECK(fabs(scores[i] - 1.0 / 3.0) < 1e-12);
    size_t bad[] = {0, 1, 5};
    CHECK(olymp_pagerank(3, 3, src, bad, w, 0.85, scores) == OLYMP_ERR_INVALID_ARGUMENT);
    CHECK(olymp_pagerank(3, 3, src, dst, w, 1.5, scores) == OLYMP_ERR_DOMAIN);
}

static void test_session(const char* fixtures, const char* out) {
    olymp_session* s = NULL;
    CHECK(olymp_session_create(&s) == OLYMP_OK);
    CHECK(olymp_command_count() == 10);
    CHECK(olymp_command_name(99) == NULL);
    CHECK(strlen(olymp_version()) > 0);
    CHECK(strcmp(olymp_status_string(OLYMP_ERR_PARSE), "parse error") == 0);

    const char* v = "x";
    CHECK(olymp_session_get(s, "seed", &v) == OLYMP_OK);
    CHECK(v == NULL);
    CHECK(olymp_session_set(s, "seed", "7") == OLYMP_OK);
    CHECK(olymp_session_get(s, "seed", &v) == OLYMP_OK);
    CHECK(v && strcmp(v, "7") == 0);
    CHECK(olymp_session_set(s, "Bad Key", "1") == OLYMP_ERR_DOMAIN);

    CHECK(olymp_run(s, "no-such-command", out) == OLYMP_ERR_USAGE);
    CHECK(olymp_run(s, "resolve", out) == OLYMP_ERR_USAGE); /* no input.countries */
    CHECK(olymp_session_report(s)[0] == '\0');

    char path[1024];
    snprintf(path, sizeof path, "%s/countries_small.csv", fixtures);
    CHECK(olymp_session_set(s, "input.countries", path) == OLYMP_OK);
    CHECK(olymp_run(s, "resolve", out) == OLYMP_OK);
    CHECK(strstr(olymp_session_report(s), "\"fuzzy\": 1") != NULL);
    olymp_session_destroy(s);
}

static void test_model(const char* fixtures, const char* out) {
    olymp_session* s = NULL;
    char path[1024], copy[1024], bad[1024];
    CHECK(olymp_session_create(&s) == OLYMP_OK);
    snprintf(path, sizeof path, "%s/countries.csv", fixtures);
    olymp_session_set(s, "input.countries", path);
    olymp_session_set(s, "stgcn.epochs", "3");
    olymp_session_set(s, "stgcn.hidden", "4");
    const olymp_status run = olymp_run(s, "predict", out);
    CHECK(run == OLYMP_OK);
    if (run != OLYMP_OK) fprintf(stderr, "%s\n", olymp_last_error());
    olymp_session_destroy(s);

    olymp_model* m = NULL;
    snprintf(path, sizeof path, "%s/model_0.ckpt", out);
    snprintf(copy, sizeof copy, "%s/copy.ckpt", out);
    snprintf(bad, sizeof bad, "%s/broken.ckpt", out);
    CHECK(olymp_model_load(path, &m) == OLYMP_OK);
    if (!m) return;
    int features = 0, hidden = 0;
    size_t params = 0, params2 = 0;
    CHECK(olymp_model_shape(m, &features, &hidden, &params) == OLYMP_OK);
    CHECK(features == 8 && hidden == 4 && params > 0);
    CHECK(olymp_model_save(m, copy) == OLYMP_OK);
    olymp_model_destroy(m);
    m = NULL;
    CHECK(olymp_model_load(copy, &m) == OLYMP_OK);
    if (m) CHECK(olymp_model_shape(m, NULL, NULL, &params2) == OLYMP_OK);
    CHECK(params2 == params);
    olymp_model_destroy(m);

    FILE* f = fopen(bad, "w");
    fputs("olymp-stgcn 9\nfeatures 1 hidden 1 tensors 0\n", f);
    fclose(f);
    m = NULL;
    CHECK(olymp_model_load(bad, &m) == OLYMP_ERR_DOMAIN);
    CHECK(m == NULL);
    CHECK(olymp_model_load("/nonexistent/model.ckpt", &m) == OLYMP_ERR_DOMAIN);
}

int main(void) {
    const char* fixtures = env_or("OLYMP_FIXTURE_DIR", "tests/fixtures");
    const char* out = env_or("OLYMP_TEST_OUT", "capi-out");
    test_pure_functions();
    test_session(fixtures, out);
    test_model(fixtures, out);
    if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
    else printf("all C API checks passed\n");
    return failures ? 1 : 0;
}
