#include "app/acceptance.hpp"

#include "app/artifacts.hpp"
#include "app/config.hpp"
#include "app/pipelines.hpp"
#include "coach/coach_effect.hpp"
#include "common/csv.hpp"
#include "common/rng.hpp"
#include "entity/resolver.hpp"
#include "influence/influence.hpp"
#include "io/ingest.hpp"
#include "synth/coach_generator.hpp"
#include "synth/pagerank_oracle.hpp"
#include "synth/panel_generator.hpp"
#include "synth/stgcn_generator.hpp"
#include "synth/typo_corpus.hpp"
#include "synth/validation_generator.hpp"
#include "synth/zicp_generator.hpp"
#include "validation/backtest.hpp"
#include "validation/causal.hpp"
#include "validation/shock.hpp"
#include "zicp/bocpd.hpp"
#include "zicp/zicp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace olymp::app {

namespace {

namespace fs = std::filesystem;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string count(int hits, int of) { return std::to_string(hits) + "/" + std::to_string(of); }

CriterionResult named(int id, std::string title) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    return r;
}

std::uint64_t sub_seed(const AcceptanceOptions& o, int id) { return derived_rng(o.seed, static_cast<std::uint64_t>(id))(); }

CriterionResult arithmetic(const AcceptanceOptions& o) {
    auto r = named(1, "arithmetic fixtures");
    const double composite = coach::compose_effect(2.15, 3.42, 1.28, 0.7, 0.5);
    validation::TreatmentDecomposition hosting;
    hosting.direct = 15.3;
    hosting.indirect = 9.2;
    const double decay = std::exp(-0.99);

    Rng rng = derived_rng(sub_seed(o, 1), 0);
    std::vector<double> econ, inst, err;
    for (int i = 0; i < 2000; ++i) {
        econ.push_back(normal(rng, 0.0, std::sqrt(0.68)));
        inst.push_back(normal(rng, 0.0, std::sqrt(0.22)));
        err.push_back(econ.back() + inst.back() + normal(rng, 0.0, std::sqrt(0.10)));
    }
    const auto shares = validation::error_decompose(err, {{"economic", econ}, {"institutional", inst}});
    double share_sum = shares.residual;
    for (const auto& [k, v] : shares.factor) share_sum += v;
    const auto phases = validation::hosting_event_study(synth::hosting_panel(sub_seed(o, 101)));
    const double phase_sum = phases.leading + phases.current + phases.subsequent;

    const bool ok_composite = std::abs(composite - 4.145) <= 0.05;
    const bool ok_total = std::abs(hosting.total() - 24.5) <= 1e-12;
    const bool ok_decay = std::abs(decay - 0.37) <= 0.01;
    const bool ok_shares = std::abs(share_sum - 1.0) <= 1e-9 && std::abs(phase_sum - 1.0) <= 1e-9;
    r.pass = ok_composite && ok_total && ok_decay && ok_shares;
    r.measured = "compose_effect=" + fmt(composite, 4) + " direct+indirect=" + fmt(hosting.total(), 4) +
                 " exp(-0.99)=" + fmt(decay, 4) + " |error shares-1|=" + sci(std::abs(share_sum - 1.0)) +
                 " |phase shares-1|=" + sci(std::abs(phase_sum - 1.0));
    r.threshold = "4.145+-0.05; 24.5; 0.37+-0.01; 1+-1e-9";
    return r;
}

CriterionResult zicp_em(const AcceptanceOptions& o) {
    auto r = named(2, "ZICP EM recovery");
    const auto data = synth::zip_panel(sub_seed(o, 2), 200, 10);
    const auto fit = zicp::fit(data);
    int drops = 0;
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
        if (fit.objective_trace[k] < fit.objective_trace[k - 1] - 1e-9 * std::abs(fit.objective_trace[k - 1])) ++drops;
    const double pi = std::accumulate(fit.pi.begin(), fit.pi.end(), 0.0) / static_cast<double>(fit.pi.size());
    const synth::ZipTruth truth;
    double worst_beta = 0.0;
    for (int j = 0; j < 3; ++j)
        worst_beta = std::max(worst_beta, std::abs(fit.model.beta[j] - truth.beta[j]) / std::abs(truth.beta[j]));
    r.pass = drops == 0 && std::abs(pi - truth.pi) <= 0.05 && worst_beta <= 0.10;
    r.measured = "rows=" + std::to_string(data.size()) + " objective decreases=" + std::to_string(drops) +
                 " mean pi=" + fmt(pi, 4) + " worst beta rel err=" + fmt(worst_beta, 4);
    r.threshold = "0 decreases; pi 0.4+-0.05; beta +-10%; <60s";
    return r;
}

CriterionResult pagerank_oracle(const AcceptanceOptions& o) {
    auto r = named(3, "PageRank vs dense oracle");
    Rng rng = derived_rng(sub_seed(o, 3), 0);
    double worst = 0.0, worst_sum = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto g = synth::random_graph(rng, 50);
        const auto pr = influence::pagerank(g);
        const auto want = synth::dense_pagerank(g, 0.85);
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(pr.scores[i] - want[i]));
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(pr.scores.begin(), pr.scores.end(), 0.0) - 1.0));
    }
    r.pass = worst <= 1e-8 && worst_sum <= 1e-9;
    r.measured = "max Linf=" + sci(worst) + " max |sum-1|=" + sci(worst_sum);
    r.threshold = "<=1e-8; <=1e-9; <5s";
    return r;
}

CriterionResult gradient(const AcceptanceOptions& o) {
    auto r = named(4, "STGCN gradient check");
    const auto s = sub_seed(o, 4);
    const auto g = synth::random_country_graph(s, 10, 4, 8, 3, true);
    const auto t = synth::random_targets(s, 10);
    const auto p = synth::random_params(s, 8, 32);
    const auto c = synth::gradient_check(g, t, p, {0.0, 1e-3, 0.0});
    r.pass = c.checked == p.size() && c.worst_rel <= 1e-4;
    r.measured = "scalars=" + std::to_string(c.checked) + " worst rel=" + sci(c.worst_rel) + " (" + c.worst_name + ")";
    r.threshold = "<=1e-4; <120s";
    return r;
}

CriterionResult ddd(const AcceptanceOptions& o) {
    auto r = named(5, "DDD coverage and placebo size");
    const synth::DddTruth truth;
    synth::DddTruth null = truth;
    null.beta[4] = 0.0;
    null.beta[5] = 0.0;
    int covered = 0, quiet = 0;
    for (int k = 0; k < 100; ++k) {
        const auto fit = coach::ddd_fit(synth::ddd_panel(derived_rng(sub_seed(o, 5), k)(), 20, truth));
        if (std::abs(fit.beta5 - truth.beta[5]) <= 2.0 * fit.beta5_se) ++covered;
        const auto placebo = coach::placebo_test(synth::ddd_panel(derived_rng(sub_seed(o, 105), k)(), 20, null), 199,
                                                 derived_rng(sub_seed(o, 205), k)());
        if (placebo.p_value > 0.1) ++quiet;
    }
    r.pass = covered >= 90 && quiet >= 90;
    r.measured = "beta5 within 2 SE " + count(covered, 100) + ", placebo p>0.1 " + count(quiet, 100);
    r.threshold = ">=90/100 each; <60s";
    return r;
}

CriterionResult bocpd(const AcceptanceOptions& o) {
    auto r = named(6, "BOCPD localisation");
    int hits = 0;
    for (int k = 0; k < 100; ++k) {
        Rng rng = derived_rng(sub_seed(o, 6), static_cast<std::uint64_t>(k));
        std::vector<double> xs;
        for (int t = 0; t < 100; ++t) xs.push_back(static_cast<double>(poisson(rng, t < 50 ? 2.0 : 12.0)));
        const auto scan = zicp::scan_changepoints(xs);
        if (scan.most_likely_change && std::abs(static_cast<int>(*scan.most_likely_change) - 50) <= 2) ++hits;
    }
    r.pass = hits >= 90;
    r.measured = "jump 2->12 at t=50 located within 2 steps " + count(hits, 100);
    r.threshold = ">=90/100; <10s";
    return r;
}

CriterionResult rk4(const AcceptanceOptions&) {
    auto r = named(7, "policy shock RK4 vs closed form");
    validation::ShockParams p;
    p.dgdp = 0.15;
    const double m0 = 10.0;
    auto worst = [&](double dt, bool relative) {
        double e = 0.0;
        for (const auto& pt : validation::policy_shock_path(p, m0, 50.0, dt)) {
            const double want = validation::policy_shock_closed_form(p, m0, pt.t);
            e = std::max(e, std::abs(pt.medals - want) / (relative ? std::abs(want) : 1.0));
        }
        return e;
    };
    const double rel = worst(1.0, true);
    const double ratio = worst(1.0, false) / worst(0.5, false);
    r.pass = rel <= 1e-6 && ratio >= 8.0;
    r.measured = "dt=1 max rel err=" + sci(rel) + " err(dt=1)/err(dt=0.5)=" + fmt(ratio, 2);
    r.threshold = "<=1e-6; >=8";
    return r;
}

CriterionResult ate(const AcceptanceOptions& o) {
    auto r = named(8, "robust ATE agreement");
    const auto d = synth::ate_data(sub_seed(o, 8), 2000, 15.0);
    bool ok = true;
    std::string m;
    for (auto method : {validation::AteMethod::IPW, validation::AteMethod::Matching, validation::AteMethod::DML}) {
        const auto a = validation::robust_ate(d, method, o.seed);
        ok = ok && std::abs(a.ate - 15.0) <= 2.0 * a.se;
        m += (m.empty() ? "" : " ") + validation::to_string(method) + "=" + fmt(a.ate, 3) + "+-" + fmt(a.se, 3);
    }
    r.pass = ok;
    r.measured = m;
    r.threshold = "|ate-15|<=2 SE each; <30s";
    return r;
}

CriterionResult entity_mapping(const AcceptanceOptions& o) {
    auto r = named(9, "entity mapping and typo recall");
    // Oracle straight from the shipped CSV: successor once the transition year has passed.
    std::ifstream in(data_dir() + "/regimes.csv");
    std::string line;
    std::vector<std::vector<std::string>> rows;
    csv::next_line(in, line);
    while (csv::next_line(in, line))
        if (!line.empty()) rows.push_back(csv::split_line(line));
    const auto table = entity::RegimeTable::builtin();
    const auto canon = entity::builtin_canon();
    int checked = 0, exact = 0;
    for (const auto& row : rows)
        for (int year = 1896; year <= 2024; ++year) {
            const bool after = row[2].empty() || year > std::stoi(row[2]);
            const std::string& want = after ? row[1] : row[0];
            checked += 2;
            exact += table.map_entity(row[0], year) == want;
            exact += entity::resolve(row[0], year, canon, table).output == want;
        }
    const auto corpus = synth::typo_corpus(canon, 500, sub_seed(o, 9));
    int recalled = 0;
    for (const auto& c : corpus)
        if (entity::resolve(c.typed, 2024, canon, table).output == c.expected_code) ++recalled;
    const double recall = recalled / 500.0;
    r.pass = checked > 0 && exact == checked && recall >= 0.90;
    r.measured = "regime lookups exact " + count(exact, checked) + ", typo recall " + count(recalled, 500) + " (" +
                 fmt(100.0 * recall, 1) + "%)";
    r.threshold = "100%; >=90%";
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

CriterionResult determinism(const AcceptanceOptions& o) {
    auto r = named(10, "predict determinism");
    fs::path scratch = o.scratch;
    if (scratch.empty()) scratch = fs::temp_directory_path() / ("olymp-acceptance-" + std::to_string(o.seed));
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    std::string countries = o.countries_path;
    if (countries.empty()) {
        countries = (scratch / "countries.csv").string();
        std::ofstream(countries) << io::write_countries(synth::synthetic_countries(o.seed));
    }
    Config cfg;
    cfg.set("input.countries", countries);
    cfg.set("seed", std::to_string(o.seed));
    std::vector<std::string> files;
    std::string diff;
    for (const char* run : {"a", "b"}) {
        Artifacts out(scratch / run);
        run_command("predict", cfg, out);
    }
    for (const auto& e : fs::directory_iterator(scratch / "a")) files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    std::size_t b_count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(scratch / "b")) ++b_count;
    for (const auto& f : files)
        if (slurp(scratch / "a" / f) != slurp(scratch / "b" / f)) diff += (diff.empty() ? "" : ",") + f;
    fs::remove_all(scratch);
    r.pass = !files.empty() && diff.empty() && b_count == files.size();
    r.measured = std::to_string(files.size()) + " files compared, differing: " + (diff.empty() ? "none" : diff);
    r.threshold = "byte-identical";
    return r;
}

double budget(int id) {
    switch (id) {
    case 2: return 60.0;
    case 3: return 5.0;
    case 4: return 120.0;
    case 5: return 60.0;
    case 6: return 10.0;
    case 8: return 30.0;
    default: return 0.0;
    }
}

} // namespace

std::vector<int> all_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    using Fn = CriterionResult (*)(const AcceptanceOptions&);
    static const Fn fns[] = {arithmetic, zicp_em, pagerank_oracle, gradient, ddd, bocpd, rk4, ate, entity_mapping, determinism};
    if (id < 1 || id > 10) throw std::out_of_range("no acceptance criterion " + std::to_string(id));
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = fns[id - 1](options);
    } catch (const std::exception& e) {
        r.id = id;
        r.title = "criterion " + std::to_string(id);
        r.pass = false;
        r.measured = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget(id) > 0.0 && r.seconds > budget(id)) {
        r.pass = false;
        r.measured += " (over time budget)";
    }
    return r;
}

std::string format_result(const CriterionResult& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2fs", r.seconds);
    return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ": " + r.measured +
           " (" + r.threshold + ") " + secs;
}

} // namespace olymp::app
