#pragma once

#include "common/panel.hpp"
#include "common/rng.hpp"
#include "entity/resolver.hpp"

#include <algorithm>
#include <cmath>

namespace olymp::synth {

/// Country panel in library units (GDP in 100M USD, population in millions)
/// with Poisson medal counts driven by GDP and team size. Codes are the
/// first `countries` entries of the builtin canonical list; one host per Games.
inline Panel synthetic_countries(std::uint64_t seed, int countries = 30, int first_year = 1992, int last_year = 2024) {
    Rng rng = derived_rng(seed, 0);
    const auto canon = entity::builtin_canon();
    const int n = std::min<int>(countries, static_cast<int>(canon.size()));
    Panel p;
    for (int c = 0; c < n; ++c) {
        const double lg0 = uniform(rng, 2.0, 10.0);
        const double growth = uniform(rng, 0.0, 0.08);
        const double pop0 = std::exp(uniform(rng, 0.0, 6.0));
        const double team = uniform(rng, 10.0, 60.0);
        for (int year = first_year; year <= last_year; year += 4) {
            const int step = (year - first_year) / 4;
            PanelRecord r;
            r.noc = canon[static_cast<std::size_t>(c)].code;
            r.year = year;
            const double lg = lg0 + growth * step;
            r.gdp = std::exp(lg);
            r.population = pop0 * (1.0 + 0.01 * step);
            r.is_host = (step * 7 + 3) % n == c;
            r.athlete_count = static_cast<int>(team * (1.0 + 0.3 * lg) + (r.is_host ? 150 : 0) + uniform(rng, 0.0, 20.0));
            const double lam = std::exp(-3.5 + 0.35 * lg + 0.004 * r.athlete_count);
            r.gold = static_cast<int>(poisson(rng, 0.32 * lam));
            r.silver = static_cast<int>(poisson(rng, 0.32 * lam));
            r.bronze = static_cast<int>(poisson(rng, 0.36 * lam));
            r.total = r.gold + r.silver + r.bronze;
            p.push_back(r);
        }
    }
    return p;
}

} // namespace olymp::synth
