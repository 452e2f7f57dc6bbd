#include "zicp/bocpd.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>

namespace olymp::zicp {

namespace {

double log_predictive(double x, double a, double b) {
    return std::lgamma(a + x) - std::lgamma(a) - std::lgamma(x + 1.0) + a * std::log(b / (b + 1.0)) -
           x * std::log1p(b);
}

} // namespace

BocpdState BocpdState::initial(const BocpdOptions& options) {
    if (!(options.hazard > 0.0 && options.hazard < 1.0)) throw DomainError("bocpd: hazard must lie in (0, 1)");
    if (!(options.prior_shape > 0.0) || !(options.prior_rate > 0.0))
        throw DomainError("bocpd: Gamma prior parameters must be positive");
    BocpdState s;
    s.hazard = options.hazard;
    s.prior_shape = options.prior_shape;
    s.prior_rate = options.prior_rate;
    return s;
}

void BocpdState::validate() const {
    if (!(hazard > 0.0 && hazard < 1.0)) throw DomainError("bocpd: hazard must lie in (0, 1)");
    if (shape.size() != run_length_posterior.size() || rate.size() != run_length_posterior.size())
        throw DomainError("bocpd: sufficient statistics do not match the posterior length");
    if (run_length_posterior.empty()) return;
    double sum = 0.0;
    for (double p : run_length_posterior) {
        if (!(p >= 0.0)) throw DomainError("bocpd: negative run-length probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("bocpd: run-length posterior does not sum to one");
}

BocpdUpdate bocpd_step(const BocpdState& state, double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bocpd_step: observation must be a non-negative count");
    BocpdUpdate u;
    BocpdState& next = u.state;
    next.hazard = state.hazard;
    next.prior_shape = state.prior_shape;
    next.prior_rate = state.prior_rate;

    const std::size_t m = state.run_length_posterior.size();
    std::vector<double> logp(m + 1);
    const double log_h = std::log(state.hazard), log_1mh = std::log1p(-state.hazard);
    logp[0] = log_predictive(x, state.prior_shape, state.prior_rate) + (m == 0 ? 0.0 : log_h);
    for (std::size_t r = 0; r < m; ++r) {
        const double p = state.run_length_posterior[r];
        logp[r + 1] = p > 0.0 ? std::log(p) + log_1mh + log_predictive(x, state.shape[r], state.rate[r])
                              : -INFINITY;
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    next.run_length_posterior.resize(m + 1);
    for (std::size_t r = 0; r <= m; ++r) {
        next.run_length_posterior[r] = std::exp(logp[r] - top);
        total += next.run_length_posterior[r];
    }
    for (double& p : next.run_length_posterior) p /= total;

    next.shape.resize(m + 1);
    next.rate.resize(m + 1);
    next.shape[0] = state.prior_shape + x;
    next.rate[0] = state.prior_rate + 1.0;
    for (std::size_t r = 0; r < m; ++r) {
        next.shape[r + 1] = state.shape[r] + x;
        next.rate[r + 1] = state.rate[r] + 1.0;
    }
    u.changepoint_prob = m == 0 ? 1.0 : next.run_length_posterior[0];
    u.refit_recommended = m > 0 && u.changepoint_prob > kRefitThreshold;
    return u;
}

ChangepointScan scan_changepoints(const std::vector<double>& counts, const BocpdOptions& options) {
    ChangepointScan scan;
    BocpdState state = BocpdState::initial(options);
    for (double x : counts) {
        auto u = bocpd_step(state, x);
        scan.changepoint_prob.push_back(u.changepoint_prob);
        scan.refit_recommended = scan.refit_recommended || u.refit_recommended;
        state = std::move(u.state);
    }
    const std::size_t n = counts.size();
    scan.location_posterior.assign(n, 0.0);
    for (std::size_t r = 0; r < state.run_length_posterior.size(); ++r)
        scan.location_posterior[n - 1 - r] = state.run_length_posterior[r];
    if (n > 0) {
        const auto best = std::max_element(scan.location_posterior.begin(), scan.location_posterior.end());
        const auto k = static_cast<std::size_t>(best - scan.location_posterior.begin());
        if (k > 0) scan.most_likely_change = k;
    }
    return scan;
}

} // namespace olymp::zicp
