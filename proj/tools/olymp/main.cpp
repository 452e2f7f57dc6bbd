#include "olymp/olymp.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
    std::map<std::string, std::string> keyed;  // config key -> flag value
};

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

const std::map<std::string, std::pair<std::string, std::vector<Flag>>>& command_flags() {
    static const std::map<std::string, std::pair<std::string, std::vector<Flag>>> table{
        {"resolve", {"Map raw country names to NOC codes and report data quality", {}}},
        {"weights", {"National power weights and bootstrap stability",
                     {{"--lambda", "weights.lambda", "decay rate"}, {"--t-current", "weights.t_current", "reference year"},
                      {"--bootstrap", "weights.bootstrap", "bootstrap replicates"}}}},
        {"influence", {"Event influence ranking by weighted PageRank",
                       {{"--damping", "influence.damping", "PageRank damping"},
                        {"--host-boost", "influence.host_boost", "host-country score multiplier"}}}},
        {"fit-zicp", {"Fit the zero-inflated Poisson model and scan for changepoints",
                      {{"--eta", "zicp.eta", "coach effect decay"}, {"--rho1", "zicp.rho1", "L1 penalty"},
                       {"--rho2", "zicp.rho2", "L2 penalty"}, {"--max-iter", "zicp.max_iter", "EM iterations"}}}},
        {"predict", {"Ensemble medal forecast with 95% intervals",
                     {{"--replicas", "predict.replicas", "ensemble size (>= 5)"}, {"--epochs", "stgcn.epochs", "epochs"},
                      {"--hidden", "stgcn.hidden", "hidden width"}, {"--top", "predict.top", "rows in forecast.csv"}}}},
        {"first-medals", {"First-medal probabilities for countries without a medal",
                          {{"--eta", "zicp.eta", "coach effect decay"}}}},
        {"coach-effect", {"Triple-difference coach effect with placebo test",
                          {{"--focal", "coach.focal", "coach_id of the focal spell"},
                           {"--permutations", "coach.permutations", "placebo permutations (>= 100)"}}}},
        {"host-sim", {"Host-country program change impact",
                      {{"--program", "host.program", "program csv"}, {"--changes", "host.changes", "changes csv"},
                       {"--baseline", "host.baseline", "baseline csv"}, {"--affinity", "host.affinity", "affinity csv"}}}},
        {"validate", {"Run the acceptance suite", {{"--criteria", "validate.criteria", "comma-separated ids or 'all'"}}}},
        {"optimize", {"Economic/institutional budget allocation",
                      {{"--allocation", "strategy.allocation", "allocation csv"}, {"--budget", "strategy.budget", "total budget"},
                       {"--rho", "strategy.rho", "allocation weight"}}}},
    };
    return table;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("-c,--config", o.config, "config file of 'key = value' lines");
    sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--set", o.sets, "override a config key (key=value), repeatable");
    const std::vector<Flag> common{{"--seed", "seed", "random seed"},
                                   {"--countries", "input.countries", "countries.csv"},
                                   {"--events", "input.events", "events.csv"},
                                   {"--coaches", "input.coaches", "coaches.csv"},
                                   {"--regimes", "input.regimes", "regimes.csv (builtin table by default)"}};
    for (const auto& f : common) sub->add_option(f.name, o.keyed[f.key], f.help);
}

int fail(olymp_status s) {
    std::cerr << olymp_last_error() << "\n";
    return s == OLYMP_ERR_USAGE || s == OLYMP_ERR_INVALID_ARGUMENT ? 2 : 1;
}

void print_acceptance(const std::string& report) {
    const auto j = nlohmann::json::parse(report);
    for (const auto& c : j["result"]["criteria"])
        std::cerr << (c["pass"].get<bool>() ? "[PASS] " : "[FAIL] ") << c["criterion"].get<int>() << " "
                  << c["title"].get<std::string>() << ": " << c["measured"].get<std::string>() << " ("
                  << c["threshold"].get<std::string>() << ")\n";
    std::cerr << j["result"]["passed"].get<int>() << " passed, " << j["result"]["failed"].get<int>() << " failed\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Olympic medal forecasting toolkit", "olymp"};
    app.set_version_flag("--version", olymp_version());
    app.require_subcommand(1);
    Options o;
    o.out = "olymp-out";
    std::string command;
    for (const auto& [name, spec] : command_flags()) {
        auto* sub = app.add_subcommand(name, spec.first);
        add_common(sub, o);
        for (const auto& f : spec.second) sub->add_option(f.name, o.keyed[f.key], f.help);
        sub->callback([&command, n = name] { command = n; });
    }
    if (argc < 2) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    olymp_session* raw = nullptr;
    if (auto s = olymp_session_create(&raw); s != OLYMP_OK) return fail(s);
    std::unique_ptr<olymp_session, decltype(&olymp_session_destroy)> session(raw, olymp_session_destroy);
    if (!o.config.empty())
        if (auto s = olymp_session_load_config(session.get(), o.config.c_str()); s != OLYMP_OK) return fail(s);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "--set expects key=value, got '" << kv << "'\n";
            return 2;
        }
        if (auto s = olymp_session_set(session.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != OLYMP_OK)
            return fail(s);
    }
    for (const auto& [key, value] : o.keyed)
        if (!value.empty())
            if (auto s = olymp_session_set(session.get(), key.c_str(), value.c_str()); s != OLYMP_OK) return fail(s);

    if (auto s = olymp_run(session.get(), command.c_str(), o.out.c_str()); s != OLYMP_OK) return fail(s);
    const std::string report = olymp_session_report(session.get());
    if (command == "validate") print_acceptance(report);
    std::cout << report << "\n";
    return 0;
}
