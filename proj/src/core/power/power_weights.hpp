#pragma once

#include "common/panel.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace olymp::power {

inline constexpr double kDefaultLambda = 0.05;
inline constexpr double kGdpFloor = 1e-6;       // 100 million USD
inline constexpr double kPopulationFloor = 1.0; // millions

struct TimedValue {
    int year = 0;
    std::optional<double> value;
};

/// Fills gaps in one country's series. Gaps bracketed by observations are
/// interpolated linearly in time; remaining gaps take the country median,
/// or the global median when the country has no observations at all.
/// Observed values are returned unchanged apart from `floor`.
/// Throws DomainError when both the series and the global pool are empty.
std::vector<double> impute_series(std::span<const TimedValue> series, std::span<const double> global_pool,
                                  double floor = 0.0);

double median(std::vector<double> values);

/// Imputes GDP and population for every country in place, treating negative
/// values as missing, and applies the GDP/population floors.
void impute_panel(Panel& panel);

/// ln(G) floored at 1 so the weight stays finite and non-negative for small economies.
double ln_floor(double gdp);

/// ln(M+1) / (ln_floor(G) * sqrt(P)) * exp(-lambda * (t_current - t)).
double national_weight(double medals, double gdp, double population, int t, int t_current,
                       double lambda = kDefaultLambda);

/// Years needed for the decay factor to halve: ln 2 / lambda.
double half_life(double lambda);

struct WeightMatrix {
    std::map<std::pair<std::string, int>, double> entries;
    double lambda = kDefaultLambda;
    int t_current = kLastObservedYear;

    double at(const std::string& noc, int year) const;
};

/// Weights for every row of an imputed panel (medals = row total).
WeightMatrix weight_matrix(const Panel& panel, int t_current, double lambda = kDefaultLambda);

struct FactorCv {
    double gdp = 0.0;
    double population = 0.0;
    double decay = 0.0;
};

/// Row bootstrap of the mean GDP term 1/ln_floor(G), population term 1/sqrt(P)
/// and decay term exp(-lambda (t_current - t)). Returns std/mean of the
/// replicate means for each term. Replicate i draws from derived_rng(seed, i).
FactorCv bootstrap_cv(const Panel& panel, int n_boot, std::uint64_t seed, int t_current,
                      double lambda = kDefaultLambda);

} // namespace olymp::power
