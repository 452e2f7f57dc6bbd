#pragma once

#include "common/error.hpp"
#include "common/panel.hpp"
#include "common/records.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace olymp::zicp {

inline constexpr double kDefaultEta = 0.33;

struct ZicpModel {
    std::array<double, 3> alpha{};  ///< structural-zero logit: intercept, S1, S2
    std::array<double, 3> beta{};   ///< static power: intercept, log GDP, athlete count
    double gamma = 0.0;
    std::array<double, 3> theta{};  ///< coach input, event experience, athlete trend
    double eta = kDefaultEta;
    double alpha_rate = 1.0;
    double exposure_T = 1.0;
    bool fitted = false;

    /// Throws DomainError when eta or exposure_T is not positive or any parameter is non-finite.
    void validate() const;
};

struct ResourceCycle {
    int cycle = 0;
    double coach_input = 0.0;
    double event_experience = 0.0;
    double athlete_growth = 0.0;
    double athlete_rate = 0.0;
};

/// Per-cycle resource inputs of one country, cycles strictly increasing.
using ResourceHistory = std::vector<ResourceCycle>;
void validate_history(const ResourceHistory& history);

double structural_zero_prob(double s1, double s2, const std::array<double, 3>& alpha);
double zero_prob(double pi, double lambda, double T);

/// Unit-theta decayed sums of (I_coach, R_event, dA) over cycles t0..t.
std::array<double, 3> gain_components(const ResourceHistory& history, double alpha_rate, double eta, int t0, int t);
double dynamic_gain(const ResourceHistory& history, const std::array<double, 3>& theta, double alpha_rate,
                    double eta, int t0, int t);

/// exp(b0 + b1 log_gdp + b2 athletes) * (1 + gamma gain). DomainError unless positive.
double intensity(const ZicpModel& model, double log_gdp, double athlete_count, double gain);

double decay_covariate(double x, double nu, double dt);

struct ZicpObservation {
    std::string noc;
    int year = 0;
    double count = 0.0;
    double log_gdp = 0.0;
    double athlete_count = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::array<double, 3> gain{};  ///< gain_components at this cycle
};

struct StructuralOptions {
    double gdp_per_capita_threshold = 2000.0;  ///< USD
};

/// Histories from the national panel and coach spells: I_coach is the summed
/// score of spells active in the cycle, R_event the number of prior Games
/// attended, athlete growth the change in athlete count and rate that change
/// relative to the previous count.
std::map<std::string, ResourceHistory> derive_histories(const Panel& panel, const std::vector<CoachSpell>& coaches);

/// One observation per panel row. GDP and population must be present (impute first).
/// S1 flags per-capita GDP below the threshold, S2 an absent team at the previous Games.
std::vector<ZicpObservation> build_observations(const Panel& panel,
                                                const std::map<std::string, ResourceHistory>& histories,
                                                const StructuralOptions& structural, double eta, double alpha_rate);

struct FitOptions {
    double rho1 = 0.1;
    double rho2 = 0.05;
    double tol = 1e-9;   ///< relative improvement of the penalised log-likelihood
    int max_iter = 500;
    double eta = kDefaultEta;
    double alpha_rate = 1.0;
    double exposure_T = 1.0;
    double alpha_ridge = 1e-4;
};

struct ZicpFit {
    ZicpModel model;
    std::vector<double> objective_trace;   ///< penalised log-likelihood per EM iteration
    std::vector<double> responsibilities;  ///< posterior structural-zero probability per row
    std::vector<double> pi;
    std::vector<double> lambda;
    int iterations = 0;
};

/// EM iterations exhausted; carries the objective trace.
class EmNonConvergenceError : public NonConvergenceError {
public:
    EmNonConvergenceError(const std::string& what, std::vector<double> last_iterate, double residual,
                          std::vector<double> trace)
        : NonConvergenceError(what, std::move(last_iterate), residual), trace_(std::move(trace)) {}
    const std::vector<double>& objective_trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// Observed-data penalised log-likelihood of the zero-inflated model.
double penalized_loglik(const ZicpModel& model, const std::vector<ZicpObservation>& data, const FitOptions& options);

ZicpFit fit(const std::vector<ZicpObservation>& data, const FitOptions& options = {});

struct FirstMedalFeatures {
    std::string noc;
    double log_gdp = 0.0;
    double athlete_count = 0.0;
    double athlete_growth = 0.0;
    double athlete_rate = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::array<double, 3> gain{};
};

struct FirstMedalForecast {
    std::string noc;
    double athlete_count = 0.0;
    double athlete_growth = 0.0;
    double athlete_rate = 0.0;
    double probability = 0.0;
};

/// (1 - pi)(1 - exp(-lambda T)) per country, sorted by probability then NOC.
std::vector<FirstMedalForecast> predict_first_medal(const ZicpModel& model,
                                                    const std::vector<FirstMedalFeatures>& countries);

/// CSV table NOC,AthleteCount,AthleteGrowth,AthleteRate,Probability.
std::string format_first_medal_table(const std::vector<FirstMedalForecast>& rows);
std::vector<FirstMedalForecast> parse_first_medal_table(const std::string& text);

} // namespace olymp::zicp
