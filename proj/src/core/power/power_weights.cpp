#include "power/power_weights.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace olymp::power {

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> impute_series(std::span<const TimedValue> series, std::span<const double> global_pool,
                                  double floor) {
    std::vector<std::size_t> observed;
    std::vector<double> own;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].value) {
            observed.push_back(i);
            own.push_back(*series[i].value);
        }
    }
    if (own.empty() && global_pool.empty())
        throw DomainError("impute_series: no observed values in the series or the global pool");
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].year <= series[i - 1].year) throw DomainError("impute_series: years must be strictly increasing");

    const double fill = own.empty() ? median(std::vector<double>(global_pool.begin(), global_pool.end())) : median(own);

    std::vector<double> out(series.size(), fill);
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const std::size_t i = observed[k];
        out[i] = *series[i].value;
        if (k + 1 == observed.size()) break;
        const std::size_t j = observed[k + 1];
        const double x0 = series[i].year, x1 = series[j].year;
        const double y0 = *series[i].value, y1 = *series[j].value;
        for (std::size_t m = i + 1; m < j; ++m) {
            const double w = (series[m].year - x0) / (x1 - x0);
            out[m] = y0 + w * (y1 - y0);
        }
    }
    for (auto& v : out) v = std::max(v, floor);
    return out;
}

void impute_panel(Panel& panel) {
    std::vector<double> gdp_pool, pop_pool;
    for (const auto& r : panel) {
        if (r.gdp && *r.gdp >= 0.0) gdp_pool.push_back(*r.gdp);
        if (r.population && *r.population >= 0.0) pop_pool.push_back(*r.population);
    }

    std::map<std::string, std::vector<std::size_t>> by_country;
    for (std::size_t i = 0; i < panel.size(); ++i) by_country[panel[i].noc].push_back(i);

    for (auto& [noc, rows] : by_country) {
        std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return panel[a].year < panel[b].year; });
        std::vector<TimedValue> gdp, pop;
        for (const std::size_t i : rows) {
            const auto& r = panel[i];
            auto valid = [](const std::optional<double>& v) { return v && *v >= 0.0 ? v : std::nullopt; };
            gdp.push_back({r.year, valid(r.gdp)});
            pop.push_back({r.year, valid(r.population)});
        }
        const auto g = impute_series(gdp, gdp_pool, kGdpFloor);
        const auto p = impute_series(pop, pop_pool, kPopulationFloor);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            panel[rows[k]].gdp = g[k];
            panel[rows[k]].population = p[k];
        }
    }
}

double ln_floor(double gdp) { return std::max(std::log(gdp), 1.0); }

double national_weight(double medals, double gdp, double population, int t, int t_current, double lambda) {
    if (t > t_current) throw DomainError("national_weight: year " + std::to_string(t) + " is after t_current");
    if (medals < 0.0) throw DomainError("national_weight: negative medal count");
    if (!(gdp > 0.0) || !(population > 0.0)) throw DomainError("national_weight: gdp and population must be positive");
    if (lambda < 0.0) throw DomainError("national_weight: negative decay coefficient");
    return std::log(medals + 1.0) / (ln_floor(gdp) * std::sqrt(population)) *
           std::exp(-lambda * static_cast<double>(t_current - t));
}

double half_life(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("half_life: lambda must be positive");
    return std::numbers::ln2 / lambda;
}

double WeightMatrix::at(const std::string& noc, int year) const {
    const auto it = entries.find({noc, year});
    if (it == entries.end()) throw DomainError("weight matrix has no entry for " + noc + " " + std::to_string(year));
    return it->second;
}

WeightMatrix weight_matrix(const Panel& panel, int t_current, double lambda) {
    WeightMatrix w;
    w.lambda = lambda;
    w.t_current = t_current;
    for (const auto& r : panel) {
        if (!r.gdp || !r.population) throw DomainError("weight_matrix: panel must be imputed first (" + r.noc + ")");
        w.entries[{r.noc, r.year}] = national_weight(r.total, std::max(*r.gdp, kGdpFloor),
                                                     std::max(*r.population, kPopulationFloor), r.year, t_current,
                                                     lambda);
    }
    return w;
}

FactorCv bootstrap_cv(const Panel& panel, int n_boot, std::uint64_t seed, int t_current, double lambda) {
    if (n_boot < 100) throw DomainError("bootstrap_cv: n_boot must be at least 100");
    if (panel.size() < 2) throw DomainError("bootstrap_cv: panel needs at least two rows");

    const std::size_t n = panel.size();
    std::vector<double> gdp_term(n), pop_term(n), decay_term(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = panel[i];
        if (!r.gdp || !r.population) throw DomainError("bootstrap_cv: panel must be imputed first");
        gdp_term[i] = 1.0 / ln_floor(std::max(*r.gdp, kGdpFloor));
        pop_term[i] = 1.0 / std::sqrt(std::max(*r.population, kPopulationFloor));
        decay_term[i] = std::exp(-lambda * static_cast<double>(t_current - r.year));
    }

    std::vector<double> g(n_boot), p(n_boot), d(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        Rng rng = derived_rng(seed, static_cast<std::uint64_t>(b));
        double sg = 0, sp = 0, sd = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = uniform_index(rng, n);
            sg += gdp_term[i];
            sp += pop_term[i];
            sd += decay_term[i];
        }
        g[b] = sg / n;
        p[b] = sp / n;
        d[b] = sd / n;
    }

    auto cv = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        return mean == 0.0 ? 0.0 : sd / std::abs(mean);
    };
    return {cv(g), cv(p), cv(d)};
}

} // namespace olymp::power
