#include "olymp/olymp.h"

#include "app/artifacts.hpp"
#include "app/config.hpp"
#include "app/pipelines.hpp"
#include "coach/coach_effect.hpp"
#include "common/error.hpp"
#include "entity/resolver.hpp"
#include "entity/similarity.hpp"
#include "influence/influence.hpp"
#include "stgcn/model.hpp"

#include <cstring>
#include <fstream>
#include <string>

#ifndef OLYMP_VERSION
#define OLYMP_VERSION "0.0.0"
#endif

struct olymp_session {
    olymp::app::Config config;
    std::string report;
};

struct olymp_model {
    olymp::stgcn::ModelParams params;
};

namespace {

thread_local std::string last_error;

olymp_status status_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const olymp::ParseError&) {
        return OLYMP_ERR_PARSE;
    } catch (const olymp::NonConvergenceError&) {
        return OLYMP_ERR_NONCONVERGENCE;
    } catch (const olymp::DomainError&) {
        return OLYMP_ERR_DOMAIN;
    } catch (const olymp::StateError&) {
        return OLYMP_ERR_STATE;
    } catch (const olymp::app::UsageError&) {
        return OLYMP_ERR_USAGE;
    } catch (...) {
        return OLYMP_ERR_INTERNAL;
    }
}

olymp_status invalid(const std::string& what) {
    last_error = nlohmann::ordered_json{{"error", {{"type", "invalid_argument"}, {"message", what}}}}.dump();
    return OLYMP_ERR_INVALID_ARGUMENT;
}

template <class F>
olymp_status guarded(const std::string& context, F&& f) {
    try {
        f();
        last_error.clear();
        return OLYMP_OK;
    } catch (...) {
        const auto e = std::current_exception();
        last_error = olymp::app::error_json(e, context).dump();
        return status_of(e);
    }
}

} // namespace

extern "C" {

const char* olymp_version(void) { return OLYMP_VERSION; }

const char* olymp_status_string(olymp_status status) {
    switch (status) {
    case OLYMP_OK: return "ok";
    case OLYMP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case OLYMP_ERR_USAGE: return "usage error";
    case OLYMP_ERR_PARSE: return "parse error";
    case OLYMP_ERR_DOMAIN: return "domain error";
    case OLYMP_ERR_STATE: return "state error";
    case OLYMP_ERR_NONCONVERGENCE: return "non-convergence";
    case OLYMP_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* olymp_last_error(void) { return last_error.c_str(); }

olymp_status olymp_session_create(olymp_session** out) {
    if (!out) return invalid("olymp_session_create: out is null");
    return guarded("session", [&] { *out = new olymp_session(); });
}

void olymp_session_destroy(olymp_session* session) { delete session; }

olymp_status olymp_session_load_config(olymp_session* session, const char* path) {
    if (!session || !path) return invalid("olymp_session_load_config: null argument");
    return guarded("config", [&] { session->config.merge(olymp::app::Config::parse_file(path)); });
}

olymp_status olymp_session_set(olymp_session* session, const char* key, const char* value) {
    if (!session || !key || !value) return invalid("olymp_session_set: null argument");
    return guarded("config", [&] { session->config.set(key, value); });
}

olymp_status olymp_session_get(const olymp_session* session, const char* key, const char** value) {
    if (!session || !key || !value) return invalid("olymp_session_get: null argument");
    const auto& v = session->config.values();
    const auto it = v.find(key);
    *value = it == v.end() ? nullptr : it->second.c_str();
    last_error.clear();
    return OLYMP_OK;
}

olymp_status olymp_run(olymp_session* session, const char* command, const char* out_dir) {
    if (!session || !command || !out_dir) return invalid("olymp_run: null argument");
    return guarded(command, [&] {
        if (!olymp::app::is_command(command))
            throw olymp::app::UsageError(std::string("unknown subcommand '") + command + "'");
        olymp::app::Artifacts out(out_dir);
        session->report = olymp::app::run_command(command, session->config, out).dump(2);
    });
}

const char* olymp_session_report(const olymp_session* session) { return session ? session->report.c_str() : ""; }

size_t olymp_command_count(void) { return olymp::app::commands().size(); }

const char* olymp_command_name(size_t index) {
    const auto& c = olymp::app::commands();
    return index < c.size() ? c[index].c_str() : nullptr;
}

olymp_status olymp_hybrid_similarity(const char* a, const char* b, double* out) {
    if (!a || !b || !out) return invalid("olymp_hybrid_similarity: null argument");
    return guarded("hybrid_similarity", [&] { *out = olymp::entity::hybrid_similarity(a, b); });
}

olymp_status olymp_map_entity(const char* name, int year, char* buf, size_t buf_size) {
    if (!name || !buf) return invalid("olymp_map_entity: null argument");
    std::string mapped;
    const auto s = guarded("map_entity", [&] {
        static const auto table = olymp::entity::RegimeTable::builtin();
        mapped = table.map_entity(name, year);
    });
    if (s != OLYMP_OK) return s;
    if (mapped.size() + 1 > buf_size) return invalid("olymp_map_entity: buffer needs " + std::to_string(mapped.size() + 1) + " bytes");
    std::memcpy(buf, mapped.c_str(), mapped.size() + 1);
    return OLYMP_OK;
}

olymp_status olymp_compose_effect(double individual, double synergy, double legacy, double w_synergy, double w_legacy,
                                  double* out) {
    if (!out) return invalid("olymp_compose_effect: out is null");
    return guarded("compose_effect",
                   [&] { *out = olymp::coach::compose_effect(individual, synergy, legacy, w_synergy, w_legacy); });
}

olymp_status olymp_pagerank(size_t n, size_t m, const size_t* src, const size_t* dst, const double* weight,
                            double damping, double* scores) {
    if (n == 0 || !scores || (m > 0 && (!src || !dst || !weight))) return invalid("olymp_pagerank: null argument or empty graph");
    for (size_t k = 0; k < m; ++k)
        if (src[k] >= n || dst[k] >= n) return invalid("olymp_pagerank: edge " + std::to_string(k) + " out of range");
    return guarded("pagerank", [&] {
        olymp::influence::WeightedDigraph g;
        for (size_t i = 0; i < n; ++i) g.add_node(std::to_string(i));
        for (size_t k = 0; k < m; ++k) g.add_edge(src[k], dst[k], weight[k]);
        olymp::influence::PageRankOptions o;
        o.damping = damping;
        const auto pr = olymp::influence::pagerank(g, o);
        std::copy(pr.scores.begin(), pr.scores.end(), scores);
    });
}

olymp_status olymp_model_load(const char* path, olymp_model** out) {
    if (!path || !out) return invalid("olymp_model_load: null argument");
    return guarded("model_load", [&] {
        std::ifstream in(path);
        if (!in) throw olymp::DomainError(std::string("cannot open '") + path + "'");
        *out = new olymp_model{olymp::stgcn::load_checkpoint(in)};
    });
}

olymp_status olymp_model_save(const olymp_model* model, const char* path) {
    if (!model || !path) return invalid("olymp_model_save: null argument");
    return guarded("model_save", [&] {
        std::ofstream out(path);
        if (!out) throw olymp::DomainError(std::string("cannot write '") + path + "'");
        olymp::stgcn::save_checkpoint(model->params, out);
    });
}

olymp_status olymp_model_shape(const olymp_model* model, int* features, int* hidden, size_t* parameters) {
    if (!model) return invalid("olymp_model_shape: model is null");
    if (features) *features = model->params.features;
    if (hidden) *hidden = model->params.hidden;
    if (parameters) *parameters = model->params.size();
    last_error.clear();
    return OLYMP_OK;
}

void olymp_model_destroy(olymp_model* model) { delete model; }

} // extern "C"
