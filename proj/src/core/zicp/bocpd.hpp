#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace olymp::zicp {

inline constexpr double kRefitThreshold = 0.5;

struct BocpdOptions {
    double hazard = 0.01;
    double prior_shape = 1.0;  ///< Gamma prior on the Poisson rate
    double prior_rate = 1.0;
};

/// Run-length posterior with Gamma sufficient statistics per run length.
/// Run length r means the current regime has absorbed r + 1 observations.
struct BocpdState {
    std::vector<double> run_length_posterior;
    std::vector<double> shape;
    std::vector<double> rate;
    double hazard = 0.01;
    double prior_shape = 1.0;
    double prior_rate = 1.0;

    static BocpdState initial(const BocpdOptions& options = {});
    /// Throws DomainError unless the posterior is a probability vector.
    void validate() const;
};

struct BocpdUpdate {
    BocpdState state;
    double changepoint_prob = 0.0;  ///< posterior mass at run length 0
    bool refit_recommended = false;
};

/// One step of the run-length recursion with a negative-binomial predictive.
BocpdUpdate bocpd_step(const BocpdState& state, double observation);

struct ChangepointScan {
    std::vector<double> changepoint_prob;  ///< filtered mass at run length 0 per step
    std::vector<double> location_posterior;  ///< p(current regime began at step k | all data)
    std::optional<std::size_t> most_likely_change;  ///< none when the stream is most likely one regime
    bool refit_recommended = false;
};

ChangepointScan scan_changepoints(const std::vector<double>& counts, const BocpdOptions& options = {});

} // namespace olymp::zicp
