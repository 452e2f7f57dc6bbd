#pragma once

#include "common/panel.hpp"
#include "common/rng.hpp"
#include "validation/causal.hpp"

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace olymp::synth {

/// y = 5 + 0.47 x before index k; from k the series drops by `jump` and continues with slope 0.32.
inline void piecewise_series(std::uint64_t seed, std::size_t n, std::size_t k, double sigma, std::vector<double>& x,
                             std::vector<double>& y, double jump = 2.0) {
    Rng rng = derived_rng(seed, 0);
    x.clear();
    y.clear();
    const double at_k = 5.0 + 0.47 * static_cast<double>(k) - jump;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i);
        x.push_back(xi);
        const double mean = i < k ? 5.0 + 0.47 * xi : at_k + 0.32 * (xi - static_cast<double>(k));
        y.push_back(mean + normal(rng, 0.0, sigma));
    }
}

/// Planted event-time path whose |theta| shares are 0.38 / 0.41 / 0.21, in medals.
inline std::array<double, 9> hosting_theta(double scale = 20.0) {
    const std::array<double, 9> shares{0.08, 0.12, 0.18, 0.41, 0.07, 0.05, 0.04, 0.03, 0.02};
    std::array<double, 9> t{};
    for (std::size_t i = 0; i < 9; ++i) t[i] = scale * shares[i];
    return t;
}

/// 40 countries over 1960-2024; the first 10 host once between 1980 and 2004.
inline Panel hosting_panel(std::uint64_t seed, double scale = 20.0, double noise = 0.5) {
    Rng rng = derived_rng(seed, 0);
    const auto theta = hosting_theta(scale);
    Panel p;
    for (int c = 0; c < 40; ++c) {
        const std::string noc = "H" + std::to_string(100 + c);
        const int host = c < 10 ? 1980 + 4 * (c % 7) : 0;
        const double level = 10.0 + normal(rng, 0.0, 4.0);
        for (int year = 1960; year <= 2024; year += 4) {
            double m = level + 0.1 * (year - 1960) / 4.0 + normal(rng, 0.0, noise);
            if (host) {
                const int k = (year - host) / 4;
                if (k >= -3 && k <= 5) m += theta[static_cast<std::size_t>(k + 3)];
            }
            PanelRecord r;
            r.noc = noc;
            r.year = year;
            r.total = static_cast<int>(std::lround(std::max(0.0, m) * 1000.0));
            r.is_host = host == year;
            p.push_back(r);
        }
    }
    return p;
}

inline validation::MediationData mediation_data(std::uint64_t seed, int n, const std::array<double, 3>& b,
                                                double direct = 4.0) {
    Rng rng = derived_rng(seed, 0);
    const std::array<double, 3> a{5.0, 8.0, 10.0};
    const std::array<std::string, 3> names{"Stadium_Invest", "TV_Rating", "Youth_Participation"};
    validation::MediationData d;
    for (int i = 0; i < n; ++i) {
        const double t = bernoulli(rng, 0.5) ? 1.0 : 0.0;
        double y = 2.0 + direct * t + normal(rng, 0.0, 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            const double m = a[j] * t + normal(rng, 0.0, 2.0);
            d.mediators[names[j]].push_back(m);
            y += b[j] * m;
        }
        d.treat.push_back(t);
        d.outcome.push_back(y);
    }
    return d;
}

/// Two covariates, logit propensity 0.5 x1 - 0.3 x2, y = 10 + 3 x1 + 2 x2 + ate T + N(0, 5).
inline validation::AteData ate_data(std::uint64_t seed, int n, double ate, double noise = 5.0) {
    Rng rng = derived_rng(seed, 0);
    validation::AteData d;
    for (int i = 0; i < n; ++i) {
        const double x1 = normal(rng), x2 = normal(rng);
        const double e = 1.0 / (1.0 + std::exp(-(0.5 * x1 - 0.3 * x2)));
        const double t = bernoulli(rng, e) ? 1.0 : 0.0;
        d.covariates.push_back({x1, x2});
        d.treat.push_back(t);
        d.outcome.push_back(10.0 + 3.0 * x1 + 2.0 * x2 + ate * t + normal(rng, 0.0, noise));
    }
    return d;
}

} // namespace olymp::synth
