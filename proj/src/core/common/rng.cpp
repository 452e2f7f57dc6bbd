#include "common/rng.hpp"

#include <cmath>
#include <numbers>

namespace olymp {

double normal(Rng& rng, double mean, double sd) {
    // Box-Muller; the second variate is discarded to keep the stream stateless.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

long poisson(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        long k = 0;
        double p = uniform01(rng);
        while (p > limit) {
            ++k;
            p *= uniform01(rng);
        }
        return k;
    }
    // Large means: split into chunks so the product method stays accurate.
    long total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
        const double chunk = std::min(remaining, 25.0);
        total += poisson(rng, chunk);
        remaining -= chunk;
    }
    return total;
}

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

} // namespace olymp
