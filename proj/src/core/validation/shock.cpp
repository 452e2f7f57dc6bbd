#include "validation/shock.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <cmath>

namespace olymp::validation {

void ShockParams::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(dgdp))
        throw DomainError("shock: parameters must be finite");
    if (!(gamma > 0.0)) throw DomainError("shock: gamma must be positive");
    if (!(gdp0 > 0.0)) throw DomainError("shock: gdp0 must be positive");
    if (!(1.0 + dgdp / gdp0 > 0.0)) throw DomainError("shock: 1 + dgdp/gdp0 must be positive");
}

std::vector<PathPoint> policy_shock_path(const ShockParams& p, double m0, double horizon, double dt) {
    p.validate();
    if (!(dt > 0.0)) throw DomainError("policy_shock_path: dt must be positive");
    if (!(horizon >= dt)) throw DomainError("policy_shock_path: horizon must be at least dt");
    const double drive = p.alpha * std::log1p(p.dgdp / p.gdp0);
    auto f = [&](double t, double) { return drive - p.beta * std::exp(-p.gamma * t); };
    const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
    std::vector<PathPoint> out{{0.0, m0}};
    double m = m0;
    for (long k = 0; k < steps; ++k) {
        const double t = k * dt;
        const double h = std::min(dt, horizon - t);
        const double k1 = f(t, m);
        const double k2 = f(t + h / 2, m + h / 2 * k1);
        const double k3 = f(t + h / 2, m + h / 2 * k2);
        const double k4 = f(t + h, m + h * k3);
        m += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        out.push_back({k + 1 == steps ? horizon : t + h, m});
    }
    return out;
}

double policy_shock_closed_form(const ShockParams& p, double m0, double t) {
    p.validate();
    return m0 + p.alpha * std::log1p(p.dgdp / p.gdp0) * t + (p.beta / p.gamma) * std::expm1(-p.gamma * t);
}

std::string to_string(Robustness r) {
    switch (r) {
    case Robustness::Stable: return "stable";
    case Robustness::Degraded: return "degraded";
    case Robustness::Unreliable: return "unreliable";
    }
    return "unknown";
}

std::vector<ScenarioResult> scenario_suite(const PanelPredictor& model, const Panel& panel,
                                           const std::vector<double>& shocks) {
    if (!model) throw StateError("scenario_suite: no predictor");
    const auto base = model(panel);
    if (base.size() != panel.size()) throw DomainError("scenario_suite: predictor returned the wrong number of rows");
    std::vector<ScenarioResult> out;
    for (double s : shocks) {
        if (!(1.0 + s > 0.0)) throw DomainError("scenario_suite: shock must keep GDP positive");
        Panel shocked = panel;
        for (auto& r : shocked)
            if (r.gdp) *r.gdp *= 1.0 + s;
        const auto pred = model(shocked);
        if (pred.size() != panel.size()) throw DomainError("scenario_suite: predictor returned the wrong number of rows");
        ScenarioResult r;
        r.shock = s;
        double sum = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < panel.size(); ++i) {
            if (base[i] > 0.0) r.max_fluctuation = std::max(r.max_fluctuation, std::abs(pred[i] - base[i]) / base[i]);
            const double y = panel[i].total, denom = std::abs(y) + std::abs(pred[i]);
            if (denom == 0.0) continue;
            sum += 2.0 * std::abs(y - pred[i]) / denom;
            ++n;
        }
        r.smape = n > 0 ? 100.0 * sum / n : 0.0;
        if (r.smape > kUnreliableSmape) r.verdict = Robustness::Unreliable;
        else if (r.max_fluctuation < kStableFluctuation) r.verdict = Robustness::Stable;
        else r.verdict = Robustness::Degraded;
        out.push_back(r);
    }
    return out;
}

std::vector<SensitivityRow> default_sensitivity_layout() {
    return {{"economic", {{"gdp", "gold"}, {"gdp", "silver"}, {"gdp", "bronze"}}},
            {"institutional", {{"coach_mobility", "total"}, {"sports_investment", "total"}}}};
}

namespace {

double pick(const std::array<double, 3>& v, const std::string& output) {
    if (output == "gold") return v[0];
    if (output == "silver") return v[1];
    if (output == "bronze") return v[2];
    if (output == "total") return v[0] + v[1] + v[2];
    throw DomainError("sensitivity_matrix: unknown output '" + output + "'");
}

} // namespace

std::vector<SensitivityRow> sensitivity_matrix(const MedalModel& model, const std::vector<FeatureRow>& rows,
                                               const std::vector<SensitivityRow>& layout, int n_boot,
                                               std::uint64_t seed) {
    if (!model) throw StateError("sensitivity_matrix: no model");
    if (rows.empty()) throw DomainError("sensitivity_matrix: no rows");
    if (n_boot < 2) throw DomainError("sensitivity_matrix: need at least 2 bootstrap replicates");
    std::vector<SensitivityRow> out = layout;
    std::uint64_t stream = 0;
    for (auto& row : out) {
        for (auto& e : row.entries) {
            std::vector<double> per_row;
            for (const auto& x : rows) {
                const auto it = x.find(e.factor);
                if (it == x.end()) throw DomainError("sensitivity_matrix: rows lack factor '" + e.factor + "'");
                const double h = 1e-4 * std::max(1.0, std::abs(it->second));
                FeatureRow up = x, dn = x;
                up[e.factor] += h;
                dn[e.factor] -= h;
                per_row.push_back((pick(model(up), e.output) - pick(model(dn), e.output)) / (2.0 * h));
            }
            const double n = static_cast<double>(per_row.size());
            double mean = 0.0;
            for (double v : per_row) mean += v / n;
            e.effect = mean;
            Rng rng = derived_rng(seed, stream++);
            std::vector<double> reps;
            for (int b = 0; b < n_boot; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < per_row.size(); ++k) s += per_row[uniform_index(rng, per_row.size())];
                reps.push_back(s / n);
            }
            double rm = 0.0, sq = 0.0;
            for (double v : reps) rm += v / n_boot;
            for (double v : reps) sq += (v - rm) * (v - rm);
            e.se = std::sqrt(sq / (n_boot - 1));
        }
    }
    return out;
}

} // namespace olymp::validation
