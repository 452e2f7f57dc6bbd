#pragma once

#include "coach/coach_effect.hpp"
#include "common/rng.hpp"

#include <array>
#include <string>

namespace olymp::synth {

struct DddTruth {
    std::array<double, 6> beta{3.0, 0.8, 0.5, 1.2, 0.6, 2.8};
    double noise = 1.0;
    double country_sd = 1.0;  ///< country-level random intercept
};

/// Balanced panel: countries x {Athletics, Swimming} x 6 Games (3 pre, 3 post 2012).
/// The first half of the countries are treated; Swimming is the focal sport.
inline coach::CoachPanel ddd_panel(std::uint64_t seed, int countries = 20, const DddTruth& truth = {}) {
    Rng rng = derived_rng(seed, 0);
    coach::CoachPanel panel;
    panel.focal_sport = "Swimming";
    for (int c = 0; c < countries; ++c) {
        const std::string noc = "K" + std::to_string(100 + c);
        const bool treat = c < countries / 2;
        const double u = normal(rng, 0.0, truth.country_sd);
        for (const std::string sport : {"Athletics", "Swimming"}) {
            for (int g = 0; g < 6; ++g) {
                const int year = 2000 + 4 * g;
                const bool post = year >= 2012;
                const double t = treat, p = post, s = sport == "Swimming";
                const auto& b = truth.beta;
                const double mean = b[0] + b[1] * t + b[2] * p + b[3] * s + b[4] * t * p + b[5] * t * p * s + u;
                panel.rows.push_back({noc, sport, year, mean + normal(rng, 0.0, truth.noise), treat, post});
            }
        }
    }
    return panel;
}

} // namespace olymp::synth
