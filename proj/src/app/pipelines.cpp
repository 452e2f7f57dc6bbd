#include "app/pipelines.hpp"

#include "app/acceptance.hpp"
#include "coach/coach_effect.hpp"
#include "common/error.hpp"
#include "common/table.hpp"
#include "entity/resolver.hpp"
#include "influence/influence.hpp"
#include "io/ingest.hpp"
#include "power/power_weights.hpp"
#include "stgcn/train.hpp"
#include "strategy/strategy.hpp"
#include "zicp/bocpd.hpp"
#include "zicp/zicp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef OLYMP_DEFAULT_DATA_DIR
#define OLYMP_DEFAULT_DATA_DIR "data"
#endif

namespace olymp::app {

using json = nlohmann::ordered_json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

std::string line(const std::vector<std::string>& fields) { return csv::join(fields) + "\n"; }

std::string required(const Config& cfg, const std::string& key, const std::string& command) {
    const auto v = cfg.text(key);
    if (v.empty()) throw UsageError(command + " needs " + key + " (config key or flag)");
    return v;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return in;
}

std::string base_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

entity::RegimeTable load_regimes(const Config& cfg, Artifacts& out) {
    const auto path = cfg.text("input.regimes");
    if (!path.empty()) {
        out.add_input("regimes", path);
        return entity::RegimeTable::from_csv_file(path);
    }
    auto t = entity::RegimeTable::builtin();
    std::string text;
    for (const auto& m : t.mappings())
        text += m.historical_name + "," + m.successor_code + "," +
                (m.transition_year ? std::to_string(*m.transition_year) : "") + "\n";
    out.add_builtin_input("regimes", text);
    return t;
}

std::vector<entity::CanonEntry> load_canon(const Config& cfg, Artifacts& out) {
    const auto path = cfg.text("input.canon");
    if (!path.empty()) {
        out.add_input("canon", path);
        return entity::load_canon_file(path);
    }
    auto c = entity::builtin_canon();
    std::string text;
    for (const auto& e : c) text += e.code + "," + e.name + "\n";
    out.add_builtin_input("canon", text);
    return c;
}

entity::ResolverOptions resolver_options(const Config& cfg) {
    entity::ResolverOptions o;
    o.threshold = cfg.real("entity.threshold", o.threshold);
    if (!(o.threshold > 0.0 && o.threshold <= 1.0)) throw DomainError("entity.threshold must lie in (0, 1]");
    return o;
}

io::CountryIngest load_countries(const Config& cfg, Artifacts& out, const std::string& command) {
    const auto path = required(cfg, "input.countries", command);
    out.add_input("countries", path);
    const auto raw = io::read_countries_file(path);
    const auto regimes = load_regimes(cfg, out);
    const auto canon = load_canon(cfg, out);
    auto ingest = io::ingest_countries(raw, canon, regimes, resolver_options(cfg));
    if (ingest.panel.empty()) throw DomainError(base_name(path) + ": no resolvable rows");
    return ingest;
}

std::vector<io::EventRow> load_events(const Config& cfg, Artifacts& out, const std::string& command) {
    const auto path = required(cfg, "input.events", command);
    out.add_input("events", path);
    auto rows = io::read_events_file(path);
    io::map_codes(rows, load_regimes(cfg, out));
    if (rows.empty()) throw DomainError(base_name(path) + ": no rows");
    return rows;
}

std::vector<CoachSpell> load_coaches(const Config& cfg, Artifacts& out, bool need, const std::string& command) {
    const auto path = need ? required(cfg, "input.coaches", command) : cfg.text("input.coaches");
    if (path.empty()) return {};
    out.add_input("coaches", path);
    auto spells = io::read_coaches_file(path);
    io::map_codes(spells, load_regimes(cfg, out));
    return spells;
}

int latest_year(const Panel& p) {
    int y = 0;
    for (const auto& r : p) y = std::max(y, r.year);
    return y;
}

json quality_json(const entity::QualityReport& q) {
    json j;
    j["missing_rate_before"] = q.missing_rate_before;
    j["missing_rate_after"] = q.missing_rate_after;
    j["code_mismatch_count"] = q.code_mismatch_count;
    j["negative_value_count"] = q.negative_value_count;
    j["year_range_violations"] = q.year_range_violations;
    j["unresolved_fraction"] = q.unresolved_fraction;
    j["flagged"] = json::array();
    for (const auto& f : q.flagged)
        j["flagged"].push_back({{"row", f.row + 1}, {"noc", f.noc}, {"year", f.year}, {"reason", f.reason}});
    return j;
}

// ---------------------------------------------------------------------------

json cmd_resolve(const Config& cfg, Artifacts& out) {
    const auto ingest = load_countries(cfg, out, "resolve");
    std::string table = line({"row", "input", "year", "noc", "score", "method"});
    std::map<std::string, int> methods;
    for (const auto& r : ingest.resolutions) {
        table += line({std::to_string(r.row), r.resolution.input, std::to_string(r.year), r.resolution.output,
                       fmt(r.resolution.score), std::string(entity::to_string(r.resolution.method))});
        ++methods[std::string(entity::to_string(r.resolution.method))];
    }
    out.write("resolutions.csv", table);
    out.write("resolved_countries.csv", io::write_countries(ingest.panel));
    std::string flags = line({"row", "noc", "year", "reason"});
    for (const auto& f : ingest.quality.flagged)
        flags += line({std::to_string(f.row + 1), f.noc, std::to_string(f.year), f.reason});
    out.write("quality_flags.csv", flags);
    json j;
    j["rows"] = ingest.resolutions.size();
    j["panel_rows"] = ingest.panel.size();
    j["methods"] = json::object();
    for (const auto& [m, n] : methods) j["methods"][m] = n;
    j["quality"] = quality_json(ingest.quality);
    return j;
}

json cmd_weights(const Config& cfg, Artifacts& out) {
    const auto ingest = load_countries(cfg, out, "weights");
    const double lambda = cfg.real("weights.lambda", power::kDefaultLambda);
    const int t_current = static_cast<int>(cfg.integer("weights.t_current", latest_year(ingest.panel)));
    const int n_boot = static_cast<int>(cfg.integer("weights.bootstrap", 200));
    const auto w = power::weight_matrix(ingest.panel, t_current, lambda);
    std::string table = line({"noc", "year", "weight"});
    for (const auto& [key, v] : w.entries) table += line({key.first, std::to_string(key.second), fmt(v, 8)});
    out.write("weights.csv", table);
    const auto cv = power::bootstrap_cv(ingest.panel, n_boot, cfg.seed(), t_current, lambda);

    std::vector<std::pair<std::string, double>> latest;
    for (const auto& [key, v] : w.entries)
        if (key.second == t_current) latest.push_back({key.first, v});
    std::stable_sort(latest.begin(), latest.end(), [](auto& a, auto& b) { return a.second > b.second; });
    json j;
    j["lambda"] = lambda;
    j["half_life_years"] = power::half_life(lambda);
    j["t_current"] = t_current;
    j["entries"] = w.entries.size();
    j["bootstrap"] = {{"replicates", n_boot}, {"cv_gdp", cv.gdp}, {"cv_population", cv.population}, {"cv_decay", cv.decay}};
    j["top"] = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, latest.size()); ++i)
        j["top"].push_back({{"noc", latest[i].first}, {"weight", latest[i].second}});
    j["quality"] = quality_json(ingest.quality);
    return j;
}

json cmd_influence(const Config& cfg, Artifacts& out) {
    const auto events = load_events(cfg, out, "influence");
    std::map<int, std::string> hosts;
    if (!cfg.text("input.countries").empty()) hosts = io::hosts(load_countries(cfg, out, "influence").panel);
    const double boost = cfg.real("influence.host_boost", 1.2);
    const double hub = cfg.real("influence.hub_weight", 1.0);
    influence::PageRankOptions po;
    po.damping = cfg.real("influence.damping", po.damping);
    po.tolerance = cfg.real("influence.tolerance", po.tolerance);
    po.max_iter = static_cast<int>(cfg.integer("influence.max_iter", po.max_iter));

    const auto matrix = influence::event_scores(io::to_event_results(events), hosts, boost);
    const auto graph = influence::build_influence_graph(matrix, hub);
    const auto pr = influence::pagerank(graph, po);
    const auto rank = influence::ranking(graph, pr);
    std::string table = line({"rank", "node", "pagerank"});
    for (std::size_t i = 0; i < rank.size(); ++i) table += line({std::to_string(i + 1), rank[i].first, fmt(rank[i].second, 10)});
    out.write("event_ranking.csv", table);
    const auto countries = influence::country_projection(matrix, graph, pr);
    std::vector<std::pair<std::string, double>> cs(countries.begin(), countries.end());
    std::stable_sort(cs.begin(), cs.end(), [](auto& a, auto& b) { return a.second > b.second; });
    std::string ct = line({"noc", "influence"});
    for (const auto& [noc, v] : cs) ct += line({noc, fmt(v, 10)});
    out.write("country_influence.csv", ct);

    json j;
    j["damping"] = po.damping;
    j["host_boost"] = boost;
    j["events"] = matrix.events().size();
    j["iterations"] = pr.iterations;
    j["top_events"] = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, rank.size()); ++i)
        j["top_events"].push_back({{"node", rank[i].first}, {"pagerank", rank[i].second}});
    j["top_countries"] = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, cs.size()); ++i)
        j["top_countries"].push_back({{"noc", cs[i].first}, {"influence", cs[i].second}});
    return j;
}

struct ZicpRun {
    Panel panel;
    std::map<std::string, zicp::ResourceHistory> histories;
    std::vector<zicp::ZicpObservation> observations;
    zicp::FitOptions options;
    zicp::ZicpFit fit;
};

ZicpRun fit_zicp(const Config& cfg, Artifacts& out, const std::string& command) {
    ZicpRun z;
    z.panel = load_countries(cfg, out, command).panel;
    const auto coaches = load_coaches(cfg, out, false, command);
    auto& o = z.options;
    o.rho1 = cfg.real("zicp.rho1", o.rho1);
    o.rho2 = cfg.real("zicp.rho2", o.rho2);
    o.tol = cfg.real("zicp.tol", o.tol);
    o.max_iter = static_cast<int>(cfg.integer("zicp.max_iter", o.max_iter));
    o.eta = cfg.real("zicp.eta", o.eta);
    o.alpha_rate = cfg.real("zicp.alpha_rate", o.alpha_rate);
    o.exposure_T = cfg.real("zicp.exposure", o.exposure_T);
    zicp::StructuralOptions so;
    so.gdp_per_capita_threshold = cfg.real("zicp.gdp_per_capita_threshold", so.gdp_per_capita_threshold);
    z.histories = zicp::derive_histories(z.panel, coaches);
    z.observations = zicp::build_observations(z.panel, z.histories, so, o.eta, o.alpha_rate);
    z.fit = zicp::fit(z.observations, o);
    return z;
}

json model_json(const zicp::ZicpModel& m) {
    json j;
    j["alpha"] = m.alpha;
    j["beta"] = m.beta;
    j["gamma"] = m.gamma;
    j["theta"] = m.theta;
    j["eta"] = m.eta;
    j["alpha_rate"] = m.alpha_rate;
    j["exposure_T"] = m.exposure_T;
    return j;
}

json cmd_fit_zicp(const Config& cfg, Artifacts& out) {
    const auto z = fit_zicp(cfg, out, "fit-zicp");
    const auto& m = z.fit.model;
    std::string coef = line({"parameter", "value"});
    const std::vector<std::pair<std::string, double>> named{
        {"alpha0", m.alpha[0]}, {"alpha_s1", m.alpha[1]}, {"alpha_s2", m.alpha[2]}, {"beta0", m.beta[0]},
        {"beta_log_gdp", m.beta[1]}, {"beta_athletes", m.beta[2]}, {"gamma", m.gamma}, {"theta_coach", m.theta[0]},
        {"theta_experience", m.theta[1]}, {"theta_athlete_trend", m.theta[2]}};
    for (const auto& [k, v] : named) coef += line({k, fmt(v, 10)});
    out.write("zicp_coefficients.csv", coef);
    std::string trace = line({"iteration", "penalized_loglik"});
    for (std::size_t i = 0; i < z.fit.objective_trace.size(); ++i)
        trace += line({std::to_string(i + 1), fmt(z.fit.objective_trace[i], 8)});
    out.write("zicp_objective.csv", trace);
    out.write("zicp_objective.svg", svg_line_chart("Penalized log-likelihood by EM iteration",
                                                   {{"objective", z.fit.objective_trace}}));

    zicp::BocpdOptions bo;
    bo.hazard = cfg.real("bocpd.hazard", bo.hazard);
    std::map<std::string, std::vector<const PanelRecord*>> series;
    for (const auto& r : z.panel) series[r.noc].push_back(&r);
    std::string cps = line({"noc", "change_year", "changepoint_prob", "refit_recommended"});
    json changes = json::array();
    for (auto& [noc, rows] : series) {
        std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->year < b->year; });
        std::vector<double> counts;
        for (const auto* r : rows) counts.push_back(r->total);
        const auto scan = zicp::scan_changepoints(counts, bo);
        std::string year, prob;
        if (scan.most_likely_change) {
            const auto k = *scan.most_likely_change;
            year = std::to_string(rows[k]->year);
            prob = fmt(scan.changepoint_prob[k], 6);
            changes.push_back({{"noc", noc}, {"change_year", rows[k]->year}, {"refit", scan.refit_recommended}});
        }
        cps += line({noc, year, prob, scan.refit_recommended ? "1" : "0"});
    }
    out.write("changepoints.csv", cps);

    double mean_pi = 0.0;
    for (double p : z.fit.pi) mean_pi += p / static_cast<double>(z.fit.pi.size());
    json j;
    j["observations"] = z.observations.size();
    j["iterations"] = z.fit.iterations;
    j["penalized_loglik"] = z.fit.objective_trace.empty() ? 0.0 : z.fit.objective_trace.back();
    j["mean_structural_zero_prob"] = mean_pi;
    j["model"] = model_json(m);
    j["changepoints"] = changes;
    return j;
}

json cmd_first_medals(const Config& cfg, Artifacts& out) {
    const auto z = fit_zicp(cfg, out, "first-medals");
    std::map<std::string, int> medals;
    std::map<std::string, std::size_t> latest;  // index into observations
    for (const auto& r : z.panel) medals[r.noc] += r.total;
    for (std::size_t i = 0; i < z.observations.size(); ++i) {
        const auto& o = z.observations[i];
        auto it = latest.find(o.noc);
        if (it == latest.end() || z.observations[it->second].year < o.year) latest[o.noc] = i;
    }
    std::vector<zicp::FirstMedalFeatures> candidates;
    for (const auto& [noc, idx] : latest) {
        if (medals[noc] > 0) continue;
        const auto& o = z.observations[idx];
        zicp::FirstMedalFeatures f;
        f.noc = noc;
        f.log_gdp = o.log_gdp;
        f.athlete_count = o.athlete_count;
        f.s1 = o.s1;
        f.s2 = o.s2;
        f.gain = o.gain;
        const auto h = z.histories.find(noc);
        if (h != z.histories.end() && !h->second.empty()) {
            f.athlete_growth = h->second.back().athlete_growth;
            f.athlete_rate = h->second.back().athlete_rate;
        }
        candidates.push_back(f);
    }
    const auto rows = zicp::predict_first_medal(z.fit.model, candidates);
    out.write("first_medals.csv", zicp::format_first_medal_table(rows));
    json j;
    j["candidates"] = candidates.size();
    j["model"] = model_json(z.fit.model);
    j["forecast"] = json::array();
    for (const auto& r : rows) j["forecast"].push_back({{"noc", r.noc}, {"probability", r.probability}});
    return j;
}

json cmd_predict(const Config& cfg, Artifacts& out) {
    const auto ingest = load_countries(cfg, out, "predict");
    const auto& panel = ingest.panel;
    stgcn::TrainConfig tc;
    tc.epochs = static_cast<int>(cfg.integer("stgcn.epochs", 300));
    tc.learning_rate = cfg.real("stgcn.lr", 0.05);
    tc.warmup = static_cast<int>(cfg.integer("stgcn.warmup", 20));
    tc.decay_factor = cfg.real("stgcn.decay", 0.5);
    tc.decay_interval = static_cast<int>(cfg.integer("stgcn.decay_interval", 150));
    tc.l1 = cfg.real("stgcn.l1", 0.0);
    tc.l2 = cfg.real("stgcn.l2", 1e-4);
    tc.dropout = cfg.real("stgcn.dropout", 0.1);
    tc.hidden = static_cast<int>(cfg.integer("stgcn.hidden", stgcn::kDefaultHidden));
    tc.seed = cfg.seed();
    tc.validate();
    const int replicas = static_cast<int>(cfg.integer("predict.replicas", stgcn::kMinReplicas));
    const int last = static_cast<int>(cfg.integer("predict.last_year", latest_year(panel)));
    stgcn::DatasetOptions train_opt;
    train_opt.steps = static_cast<int>(cfg.integer("predict.steps", 4));
    train_opt.neighbors = static_cast<int>(cfg.integer("predict.neighbors", 3));
    train_opt.lambda = cfg.real("weights.lambda", power::kDefaultLambda);
    train_opt.last_year = last - 4;
    train_opt.target_year = last;
    auto forecast_opt = train_opt;
    forecast_opt.last_year = last;
    forecast_opt.target_year.reset();

    const auto train_set = stgcn::build_dataset(panel, train_opt);
    const auto forecast_set = stgcn::build_dataset(panel, forecast_opt);
    const auto fits = stgcn::train_ensemble(train_set, tc, replicas);
    std::vector<stgcn::ModelParams> models;
    for (const auto& f : fits) models.push_back(f.params);
    const auto rows = stgcn::predict_with_ci(models, forecast_set.graph, train_set.scale);

    out.write("forecast.csv", stgcn::format_forecast_table(rows, static_cast<std::size_t>(cfg.integer("predict.top", 0))));
    std::string detail = line({"rank", "noc", "gold", "gold_lo", "gold_hi", "silver", "silver_lo", "silver_hi", "bronze",
                               "bronze_lo", "bronze_hi", "total", "total_lo", "total_hi"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::vector<std::string> f{std::to_string(i + 1), r.noc};
        for (int c = 0; c < 3; ++c)
            for (double v : {r.point[c], r.ci[c].lo, r.ci[c].hi}) f.push_back(fmt(v, 4));
        for (double v : {r.total, r.total_range.lo, r.total_range.hi}) f.push_back(fmt(v, 4));
        detail += line(f);
    }
    out.write("forecast_detail.csv", detail);
    std::string curves = line({"epoch", "replica", "loss"});
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (std::size_t r = 0; r < fits.size(); ++r) {
        for (std::size_t e = 0; e < fits[r].loss_curve.size(); ++e)
            curves += line({std::to_string(e), std::to_string(r), fmt(fits[r].loss_curve[e], 10)});
        series.push_back({"replica " + std::to_string(r), fits[r].loss_curve});
        std::ostringstream ck;
        stgcn::save_checkpoint(fits[r].params, ck);
        out.write("model_" + std::to_string(r) + ".ckpt", ck.str());
    }
    out.write("loss_curves.csv", curves);
    out.write("loss_curves.svg", svg_line_chart("Training loss by epoch", series));

    json j;
    j["train_window"] = {{"last_feature_year", train_opt.last_year}, {"target_year", last}, {"steps", train_opt.steps}};
    j["forecast_year"] = last + 4;
    j["nodes"] = forecast_set.graph.n();
    j["replicas"] = replicas;
    j["target_scale"] = train_set.scale;
    j["final_loss"] = json::array();
    for (const auto& f : fits) j["final_loss"].push_back(f.loss_curve.back());
    j["table"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        json row;
        row["rank"] = i + 1;
        row["country"] = r.noc;
        const char* names[] = {"gold", "silver", "bronze"};
        for (int c = 0; c < 3; ++c)
            row[names[c]] = {{"pred", r.point[c]}, {"ci", {r.ci[c].lo, r.ci[c].hi}}};
        row["total"] = r.total;
        row["total_range"] = {r.total_range.lo, r.total_range.hi};
        j["table"].push_back(row);
    }
    return j;
}

json cmd_coach_effect(const Config& cfg, Artifacts& out) {
    const auto events = load_events(cfg, out, "coach-effect");
    auto spells = load_coaches(cfg, out, true, "coach-effect");
    if (spells.empty()) throw DomainError("coach-effect: coaches file has no rows");
    const auto medals = io::sport_medals(events);
    std::set<int> years;
    std::set<std::string> nocs, sports;
    for (const auto& e : events) {
        years.insert(e.year);
        nocs.insert(e.noc);
        sports.insert(e.sport);
    }
    std::stable_sort(spells.begin(), spells.end(), [](const CoachSpell& a, const CoachSpell& b) {
        return std::tie(b.score, a.start_year, a.noc, a.sport, a.coach_id) <
               std::tie(a.score, b.start_year, b.noc, b.sport, b.coach_id);
    });
    const CoachSpell* focal = nullptr;
    const auto wanted = cfg.text("coach.focal");
    for (const auto& s : spells) {
        if (!wanted.empty()) {
            if (s.coach_id == wanted) focal = &s;
            continue;
        }
        const bool before = years.begin() != years.end() && *years.begin() < s.start_year;
        const bool after = !years.empty() && *years.rbegin() >= s.start_year;
        if (sports.count(s.sport) && nocs.count(s.noc) && before && after) {
            focal = &s;
            break;
        }
    }
    if (!focal)
        throw DomainError(wanted.empty() ? "coach-effect: no coach spell has event data before and after its start"
                                         : "coach-effect: no coach with id '" + wanted + "'");

    coach::CoachPanel panel;
    panel.focal_sport = focal->sport;
    for (const auto& noc : nocs)
        for (const auto& sport : sports)
            for (int y : years) {
                double m = 0.0;
                if (auto a = medals.find(noc); a != medals.end())
                    if (auto b = a->second.find(sport); b != a->second.end())
                        if (auto c = b->second.find(y); c != b->second.end()) m = c->second;
                panel.rows.push_back({noc, sport, y, m, noc == focal->noc, y >= focal->start_year});
            }
    const auto ddd = coach::ddd_fit(panel);
    std::string table = line({"term", "beta", "se", "p_value"});
    for (std::size_t i = 0; i < ddd.names.size(); ++i)
        table += line({ddd.names[i], fmt(ddd.beta[i], 8), fmt(ddd.se[i], 8), fmt(ddd.p_values[i], 8)});
    out.write("ddd.csv", table);

    const int perms = static_cast<int>(cfg.integer("coach.permutations", 199));
    const auto placebo = coach::placebo_test(panel, perms, cfg.seed());
    const auto cases = coach::screen_coach_cases(medals, spells, cfg.real("coach.threshold_sigma", 2.0),
                                                 static_cast<int>(cfg.integer("coach.window", 3)));
    std::string ct = line({"noc", "sport", "coach_id", "start_year", "pre_mean", "post_mean", "pre_sd", "z", "flagged"});
    json flagged = json::array();
    for (const auto& c : cases) {
        ct += line({c.spell.noc, c.spell.sport, c.spell.coach_id, std::to_string(c.spell.start_year), fmt(c.pre_mean, 4),
                    fmt(c.post_mean, 4), fmt(c.pre_sd, 4), fmt(c.z, 4), c.flagged ? "1" : "0"});
        if (c.flagged) flagged.push_back({{"noc", c.spell.noc}, {"sport", c.spell.sport}, {"coach_id", c.spell.coach_id}, {"z", num(c.z)}});
    }
    out.write("coach_cases.csv", ct);

    json j;
    j["focal"] = {{"noc", focal->noc}, {"sport", focal->sport}, {"coach_id", focal->coach_id}, {"start_year", focal->start_year}};
    j["ddd"] = {{"beta5", ddd.beta5}, {"se", ddd.beta5_se}, {"p_value", ddd.beta5_p}, {"clusters", ddd.n_clusters},
                {"reference_sport", panel.reference_sport()}};
    j["placebo"] = {{"permutations", perms}, {"observed", placebo.observed}, {"p_value", placebo.p_value},
                    {"mean", placebo.mean}, {"mc_standard_error", placebo.mc_standard_error}};
    j["flagged_cases"] = flagged;
    if (cfg.has("coach.individual")) {
        const double ws = cfg.real("coach.synergy_weight", coach::kDefaultSynergyWeight);
        const double wl = cfg.real("coach.legacy_weight", coach::kDefaultLegacyWeight);
        const double ind = cfg.real("coach.individual", 0.0), syn = cfg.real("coach.synergy", 0.0),
                     leg = cfg.real("coach.legacy", 0.0);
        j["composite_effect"] = {{"individual", ind}, {"synergy", syn}, {"legacy", leg}, {"synergy_weight", ws},
                                 {"legacy_weight", wl}, {"value", coach::compose_effect(ind, syn, leg, ws, wl)}};
    }
    return j;
}

std::string scenario_path(const Config& cfg, const std::string& key, const std::string& fallback, Artifacts& out) {
    auto p = cfg.text(key);
    if (p.empty()) p = data_dir() + "/scenarios/" + fallback;
    out.add_input(key, p);
    return p;
}

json cmd_host_sim(const Config& cfg, Artifacts& out) {
    strategy::HostSimInput in;
    const auto bp = scenario_path(cfg, "host.baseline", "la2028_baseline.csv", out);
    const auto pp = scenario_path(cfg, "host.program", "la2028_program.csv", out);
    const auto cp = scenario_path(cfg, "host.changes", "la2028_changes.csv", out);
    const auto ap = scenario_path(cfg, "host.affinity", "la2028_affinity.csv", out);
    strategy::EventWeightInputs coef;
    coef.alpha = cfg.real("strategy.event_weight.alpha", coef.alpha);
    coef.beta = cfg.real("strategy.event_weight.beta", coef.beta);
    coef.gamma = cfg.real("strategy.event_weight.gamma", coef.gamma);
    {
        auto s = open_input(bp);
        in.baseline = strategy::read_baseline(s, base_name(bp));
    }
    {
        auto s = open_input(pp);
        in.program = strategy::read_program(s, base_name(pp));
    }
    {
        auto s = open_input(cp);
        in.changes = strategy::read_changes(s, base_name(cp));
    }
    {
        auto s = open_input(ap);
        in.affinities = strategy::read_affinities(s, base_name(ap), coef);
    }
    const auto impact = strategy::host_impact_sim(in);
    out.write("impact.csv", strategy::format_impact_table(impact));
    std::string detail = line({"noc", "baseline", "delta", "percent", "major_event"});
    for (const auto& c : impact.countries)
        detail += line({c.noc, fmt(c.baseline, 4), fmt(c.delta, 6), fmt(c.percent, 4), c.major_event});
    out.write("impact_detail.csv", detail);
    json j;
    j["pool_change"] = impact.pool_change;
    j["total_percentage"] = impact.total_percentage;
    j["countries"] = json::array();
    for (const auto& c : impact.countries)
        j["countries"].push_back({{"noc", c.noc}, {"delta", c.delta}, {"band", strategy::medal_band(c.delta)},
                                  {"major_event", c.major_event}});
    return j;
}

json cmd_optimize(const Config& cfg, Artifacts& out) {
    const auto path = scenario_path(cfg, "strategy.allocation", "allocation_calibrated.csv", out);
    auto s = open_input(path);
    auto p = strategy::read_allocation(s, base_name(path));
    p.rho = cfg.real("strategy.rho", p.rho);
    p.budget = cfg.real("strategy.budget", 100.0);
    p.tolerance = cfg.real("strategy.tolerance", p.tolerance);
    p.max_iter = static_cast<int>(cfg.integer("strategy.max_iter", p.max_iter));
    const auto a = strategy::optimize_allocation(p);
    std::string table = line({"sport", "economic", "institutional"});
    for (std::size_t i = 0; i < a.x.size(); ++i)
        table += line({i < p.sports.size() ? p.sports[i] : std::to_string(i), fmt(a.x[i], 8), fmt(a.y[i], 8)});
    out.write("allocation.csv", table);
    out.write("allocation_objective.svg", svg_line_chart("Objective by iteration", {{"objective", a.objective_trace}}));
    json j;
    j["rho"] = p.rho;
    j["budget"] = p.budget;
    j["objective"] = a.objective;
    j["ratio"] = num(a.ratio);
    j["kkt_residual"] = a.kkt_residual;
    j["iterations"] = a.iterations;
    return j;
}

json cmd_validate(const Config& cfg, Artifacts& out) {
    AcceptanceOptions opt;
    opt.seed = cfg.has("seed") ? cfg.seed() : opt.seed;
    opt.countries_path = cfg.text("input.countries");
    opt.scratch = out.dir() / "scratch";
    std::vector<int> ids;
    const auto sel = cfg.text("validate.criteria");
    if (sel.empty() || sel == "all") {
        ids = all_criteria();
    } else {
        std::stringstream ss(sel);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            int id = 0;
            try {
                id = std::stoi(tok);
            } catch (const std::exception&) {
                throw DomainError("validate.criteria: bad entry '" + tok + "'");
            }
            if (id < 1 || id > 10) throw DomainError("validate.criteria: no criterion " + tok);
            ids.push_back(id);
        }
    }
    std::string table = line({"criterion", "title", "pass", "measured", "threshold"});
    json rows = json::array();
    int passed = 0;
    for (int id : ids) {
        const auto r = run_criterion(id, opt);
        passed += r.pass;
        table += line({std::to_string(r.id), r.title, r.pass ? "pass" : "fail", r.measured, r.threshold});
        rows.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"measured", r.measured},
                        {"threshold", r.threshold}});
    }
    std::error_code ec;
    std::filesystem::remove_all(opt.scratch, ec);
    out.write("acceptance.csv", table);
    json j;
    j["criteria"] = rows;
    j["passed"] = passed;
    j["failed"] = static_cast<int>(ids.size()) - passed;
    return j;
}

using Handler = json (*)(const Config&, Artifacts&);

const std::vector<std::pair<std::string, Handler>>& table() {
    static const std::vector<std::pair<std::string, Handler>> t{
        {"resolve", cmd_resolve},         {"weights", cmd_weights},           {"influence", cmd_influence},
        {"fit-zicp", cmd_fit_zicp},       {"predict", cmd_predict},           {"first-medals", cmd_first_medals},
        {"coach-effect", cmd_coach_effect}, {"host-sim", cmd_host_sim},       {"validate", cmd_validate},
        {"optimize", cmd_optimize}};
    return t;
}

} // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : table()) n.push_back(k);
        return n;
    }();
    return names;
}

bool is_command(const std::string& name) {
    const auto& c = commands();
    return std::find(c.begin(), c.end(), name) != c.end();
}

std::string data_dir() {
    if (const char* env = std::getenv("OLYMP_DATA_DIR"); env && *env) return env;
    return OLYMP_DEFAULT_DATA_DIR;
}

json run_command(const std::string& command, const Config& config, Artifacts& out) {
    Handler h = nullptr;
    for (const auto& [k, v] : table())
        if (k == command) h = v;
    if (!h) throw UsageError("unknown subcommand '" + command + "'");
    json report;
    report["command"] = command;
    report["seed"] = std::to_string(config.seed());
    report["result"] = h(config, out);
    const auto unused = config.unused();
    if (!unused.empty()) report["unused_config_keys"] = unused;
    out.write("report.json", report.dump(2) + "\n");
    out.write("manifest.json", out.manifest(command, config).dump(2) + "\n");
    return report;
}

json error_json(const std::exception_ptr& e, const std::string& command) {
    json err;
    err["command"] = command;
    try {
        std::rethrow_exception(e);
    } catch (const ParseError& x) {
        err["type"] = "parse_error";
        err["message"] = x.what();
        err["file"] = x.file();
        err["row"] = x.row();
        err["column"] = x.column();
    } catch (const NonConvergenceError& x) {
        err["type"] = "non_convergence";
        err["message"] = x.what();
        err["residual"] = num(x.residual());
    } catch (const DomainError& x) {
        err["type"] = "domain_error";
        err["message"] = x.what();
    } catch (const StateError& x) {
        err["type"] = "state_error";
        err["message"] = x.what();
    } catch (const UsageError& x) {
        err["type"] = "usage_error";
        err["message"] = x.what();
    } catch (const std::exception& x) {
        err["type"] = "internal_error";
        err["message"] = x.what();
    } catch (...) {
        err["type"] = "internal_error";
        err["message"] = "unknown exception";
    }
    return json{{"error", err}};
}

} // namespace olymp::app
