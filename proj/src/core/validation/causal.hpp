#pragma once

#include "coach/coach_effect.hpp"
#include "common/panel.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace olymp::validation {

struct MediationData {
    std::vector<double> outcome;
    std::vector<double> treat;
    std::map<std::string, std::vector<double>> mediators;
};

struct MediatorPath {
    double a = 0.0;  ///< treat -> mediator
    double a_se = 0.0;
    double b = 0.0;  ///< mediator -> outcome, given treat and the other mediators
    double b_se = 0.0;
    double indirect = 0.0;  ///< a * b
    double sobel_z = 0.0;
    double sobel_p = 1.0;
};

struct TreatmentDecomposition {
    double direct = 0.0;
    double indirect = 0.0;
    std::map<std::string, MediatorPath> mediator_paths;
    double uncertainty = 0.0;  ///< standard error of the total effect

    double total() const { return direct + indirect; }
};

/// Total effect from OLS of the outcome on treatment; indirect effect by
/// product of coefficients summed over mediators; direct = total - indirect.
TreatmentDecomposition treatment_decompose(const MediationData& data);

struct HostingEventStudy {
    coach::EventStudyResult path;  ///< theta_k for k in [-3, 5]
    double leading = 0.0;          ///< share of sum |theta_k| over k = -3..-1
    double current = 0.0;          ///< k = 0
    double subsequent = 0.0;       ///< k = 1..5
};

/// Event study around each country's first hosting year in the panel. All
/// window dummies are estimated; non-host countries and out-of-window years
/// form the baseline.
HostingEventStudy hosting_event_study(const Panel& panel);

struct ModerationResult {
    std::vector<std::string> names;  ///< const first
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    double adj_r_squared = 0.0;
    std::map<std::string, double> vif;
    std::optional<double> shapiro_p;  ///< empty when residuals are numerically zero
    double shapiro_w = 1.0;
};

inline constexpr double kVifLimit = 10.0;

/// OLS of unit-level treatment effects on moderators with VIF and
/// Shapiro-Wilk diagnostics. Throws DomainError listing VIFs above 10.
ModerationResult moderation_fit(const std::vector<double>& effect,
                                const std::map<std::string, std::vector<double>>& moderators);

/// VIF of each column: 1 / (1 - R^2) from regressing it on the others plus a constant.
std::map<std::string, double> variance_inflation(const std::map<std::string, std::vector<double>>& columns);

enum class AteMethod { IPW, Matching, DML };
std::string to_string(AteMethod m);
AteMethod parse_ate_method(const std::string& name);

struct AteData {
    std::vector<double> outcome;
    std::vector<double> treat;                   ///< 0/1
    std::vector<std::vector<double>> covariates;  ///< one vector per unit
};

struct AteResult {
    double ate = 0.0;
    double se = 0.0;
    int n_used = 0;  ///< units left after propensity trimming
};

inline constexpr double kTrimLow = 0.05;
inline constexpr double kTrimHigh = 0.95;

/// IPW: normalised Horvitz-Thompson with logit propensities. Matching:
/// 1-nearest-neighbour on the propensity with regression bias correction and
/// Abadie-Imbens standard errors. DML: 5-fold cross-fitted partialling-out
/// with OLS nuisance models. Units with propensity outside [0.05, 0.95] are dropped.
AteResult robust_ate(const AteData& data, AteMethod method, std::uint64_t seed = 0);

} // namespace olymp::validation
