#pragma once

#include "common/panel.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace olymp::validation {

struct ShockParams {
    double alpha = 0.82;
    double beta = 0.15;
    double gamma = 0.07;
    double dgdp = 0.0;
    double gdp0 = 1.0;

    void validate() const;
};

struct PathPoint {
    double t = 0.0;
    double medals = 0.0;
};

/// RK4 integration of dM/dt = alpha ln(1 + dgdp/gdp0) - beta e^{-gamma t} from M(0) = m0.
std::vector<PathPoint> policy_shock_path(const ShockParams& p, double m0, double horizon, double dt);
/// m0 + alpha ln(1 + dgdp/gdp0) t + (beta/gamma)(e^{-gamma t} - 1)
double policy_shock_closed_form(const ShockParams& p, double m0, double t);

/// Predicted total medals, one per panel row.
using PanelPredictor = std::function<std::vector<double>(const Panel&)>;

enum class Robustness { Stable, Degraded, Unreliable };
std::string to_string(Robustness r);

inline constexpr double kStableFluctuation = 0.08;
inline constexpr double kUnreliableSmape = 40.0;

struct ScenarioResult {
    double shock = 0.0;            ///< fractional GDP change
    double max_fluctuation = 0.0;  ///< max |p - b| / b over rows with baseline b > 0
    double smape = 0.0;            ///< against observed totals
    Robustness verdict = Robustness::Stable;
};

/// Scales every row's GDP by (1 + shock) and re-predicts. Stable when the
/// fluctuation is below 8% and SMAPE at most 40%, unreliable when SMAPE
/// exceeds 40%, degraded otherwise.
std::vector<ScenarioResult> scenario_suite(const PanelPredictor& model, const Panel& panel,
                                           const std::vector<double>& shocks = {-0.30, -0.15, -0.05, 0.05, 0.15,
                                                                                0.30});

using FeatureRow = std::map<std::string, double>;
/// Gold, silver, bronze predictions for one feature row.
using MedalModel = std::function<std::array<double, 3>(const FeatureRow&)>;

struct SensitivityEntry {
    std::string factor;
    std::string output;  ///< gold, silver, bronze or total
    double effect = 0.0;
    double se = 0.0;
};

struct SensitivityRow {
    std::string name;
    std::vector<SensitivityEntry> entries;
};

/// economic: gdp on gold/silver/bronze; institutional: coach_mobility and
/// sports_investment on the total.
std::vector<SensitivityRow> default_sensitivity_layout();

/// Average central finite-difference marginal effect over the rows, with a
/// row-bootstrap standard error.
std::vector<SensitivityRow> sensitivity_matrix(const MedalModel& model, const std::vector<FeatureRow>& rows,
                                               const std::vector<SensitivityRow>& layout, int n_boot = 200,
                                               std::uint64_t seed = 0);

} // namespace olymp::validation
