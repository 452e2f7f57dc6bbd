#pragma once

#include "common/records.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace olymp::coach {

struct CoachRow {
    std::string noc;
    std::string sport;
    int year = 0;
    double medals = 0.0;
    bool treat = false;
    bool post = false;
};

/// Country-sport-year medal panel around a coach appointment in `focal_sport`.
struct CoachPanel {
    std::vector<CoachRow> rows;
    std::string focal_sport;

    std::vector<std::string> sports() const;
    /// Reference (omitted) sport: the lexicographically first sport other than the focal one.
    std::string reference_sport() const;
    /// Throws DomainError unless there are >= 2 sports, >= 2 periods, and both treatment arms.
    void validate() const;
};

struct DddResult {
    std::vector<std::string> names;
    std::vector<double> beta;
    std::vector<double> se;
    std::vector<double> p_values;
    double beta5 = 0.0;
    double beta5_se = 0.0;
    double beta5_p = 1.0;
    int n_clusters = 0;
};

/// OLS of medals on Treat, Post, sport dummies, Treat x Post and Treat x Post x Sport
/// with country-clustered standard errors. beta5 is the focal-sport triple interaction.
DddResult ddd_fit(const CoachPanel& panel);

inline constexpr double kDefaultSynergyWeight = 0.7;
inline constexpr double kDefaultLegacyWeight = 0.5;

double compose_effect(double individual, double synergy, double legacy, double w_synergy = kDefaultSynergyWeight,
                      double w_legacy = kDefaultLegacyWeight);

struct PlaceboResult {
    double observed = 0.0;           ///< observed triple-difference effect
    double p_value = 1.0;            ///< (1 + #{|gamma3| >= |observed|}) / (1 + n_permutations)
    std::vector<double> gamma3;      ///< per-permutation placebo coefficients
    double mean = 0.0;
    double mc_standard_error = 0.0;  ///< sd(gamma3) / sqrt(n_permutations)
};

/// Permutes treatment labels across countries and re-estimates the placebo
/// difference-in-differences coefficient on the per-country focal-minus-reference
/// medal contrast (equal to the DDD coefficient under the true labels on a
/// balanced panel).
PlaceboResult placebo_test(const CoachPanel& panel, int n_permutations, std::uint64_t seed);

struct EventStudyRow {
    std::string noc;
    int year = 0;
    double medals = 0.0;
    std::optional<int> introduction_year;  ///< empty for never-treated units
};

struct EventStudyOptions {
    int k_min = -3;
    int k_max = 5;
    /// Omitted event time. When empty every k in the window is estimated and
    /// treated-unit rows outside the window stay in the sample as baseline.
    std::optional<int> reference_k = -1;
    int years_per_step = 4;
};

struct EventStudyResult {
    std::vector<int> k;
    std::vector<double> delta;
    std::vector<double> se;
    double monotonicity = 0.0;  ///< Spearman correlation of delta_k with k over k >= 0
    bool rising = false;        ///< delta strictly increasing over k >= 0

    double at(int k) const;
};

/// Event-time indicators for k in [k_min, k_max] (reference omitted, reported as 0)
/// plus country fixed effects, and year fixed effects when never-treated units exist.
/// With a reference category, treated-unit rows outside the window are dropped.
EventStudyResult event_study(const std::vector<EventStudyRow>& rows, const EventStudyOptions& options = {});

struct CoachCase {
    CoachSpell spell;
    double pre_mean = 0.0;
    double post_mean = 0.0;
    double pre_sd = 0.0;
    double z = 0.0;  ///< (post_mean - pre_mean) / pre_sd
    bool flagged = false;
};

/// medals: noc -> sport -> year -> count. Compares 3 Games before the
/// appointment with 3 Games from it; sigma from the pre period only.
std::vector<CoachCase> screen_coach_cases(const std::map<std::string, std::map<std::string, std::map<int, double>>>& medals,
                                          const std::vector<CoachSpell>& spells, double threshold_sigma = 2.0,
                                          int window_games = 3);

} // namespace olymp::coach
