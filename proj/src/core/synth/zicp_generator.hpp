#pragma once

#include "common/rng.hpp"
#include "zicp/zicp.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace olymp::synth {

struct ZipTruth {
    double pi = 0.4;
    std::array<double, 3> beta{1.0, 0.4, 0.03};
    std::array<double, 3> phi{0.5, 0.0, 0.0};
};

/// Rows drawn from the zero-inflated generator itself: structural zero with
/// probability pi, else Poisson(exp(b.x) (1 + phi.g)).
inline std::vector<zicp::ZicpObservation> zip_panel(std::uint64_t seed, int countries, int years,
                                                    const ZipTruth& truth = {}) {
    Rng rng = derived_rng(seed, 0);
    std::vector<zicp::ZicpObservation> out;
    for (int c = 0; c < countries; ++c) {
        for (int t = 0; t < years; ++t) {
            zicp::ZicpObservation o;
            o.noc = "C" + std::to_string(1000 + c);
            o.year = 1988 + 4 * t;
            o.log_gdp = uniform(rng, -2.0, 2.0);
            o.athlete_count = std::floor(uniform(rng, 0.0, 40.0));
            o.s1 = bernoulli(rng, 0.3) ? 1.0 : 0.0;
            o.s2 = bernoulli(rng, 0.3) ? 1.0 : 0.0;
            o.gain = {uniform01(rng), uniform01(rng), 0.0};
            const double lam = std::exp(truth.beta[0] + truth.beta[1] * o.log_gdp + truth.beta[2] * o.athlete_count) *
                               (1.0 + truth.phi[0] * o.gain[0] + truth.phi[1] * o.gain[1] + truth.phi[2] * o.gain[2]);
            const bool structural = bernoulli(rng, truth.pi);
            o.count = structural ? 0.0 : static_cast<double>(poisson(rng, lam));
            out.push_back(std::move(o));
        }
    }
    return out;
}

} // namespace olymp::synth
