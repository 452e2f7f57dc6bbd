#pragma once

#include <map>
#include <string>
#include <vector>

namespace olymp::validation {

struct BacktestPoint {
    int year = 0;
    double observed = 0.0;
    double predicted = 0.0;
};

/// Observed/predicted pairs with strictly increasing years.
using BacktestSeries = std::vector<BacktestPoint>;
void validate_series(const BacktestSeries& series);

/// Mean of 200|y - yhat| / (|y| + |yhat|) over years in [t - h, t + h].
double smape_window(const BacktestSeries& series, int t, int h = 5);

struct Era {
    std::string name;
    int from = 0;
    int to = 0;
};

/// Cold War 1976-1991, Globalization 1992-2016, COVID-19 2017-2024.
std::vector<Era> default_eras();

struct EraSmape {
    Era era;
    double smape = 0.0;  ///< average of smape_window over the series years inside the era
    int n = 0;
};

std::vector<EraSmape> era_smape(const BacktestSeries& series, const std::vector<Era>& eras, int h = 5);
/// "era,from,to,smape" CSV with one decimal.
std::string format_era_report(const std::vector<EraSmape>& rows);

struct Segment {
    std::size_t begin = 0;  ///< first index
    std::size_t end = 0;    ///< one past the last index
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_se = 0.0;
    double slope_se = 0.0;
    double ssr = 0.0;
};

struct BreakResult {
    std::vector<std::size_t> breaks;  ///< index where each new segment starts
    std::vector<double> break_x;      ///< x at those indices
    std::vector<Segment> segments;
    std::vector<double> sup_f;        ///< Chow F of each break against merging its two neighbours
    std::vector<double> sup_f_p;
    std::vector<double> ssr_by_count; ///< optimal SSR for 0..max_breaks breaks
    std::vector<double> bic_by_count;
    double ssr = 0.0;
};

/// Segmented linear regression y ~ 1 + x with breaks placed by dynamic
/// programming on total SSR; the number of breaks (<= max_breaks) minimises BIC.
/// x must be strictly increasing.
BreakResult detect_breaks(const std::vector<double>& x, const std::vector<double>& y, int max_breaks,
                          int min_segment);

struct ErrorShares {
    std::map<std::string, double> factor;  ///< beta_j cov(f_j, e) / var(e)
    double residual = 0.0;                 ///< 1 - R^2
};

/// Explained-variance shares of the prediction errors by factor (covariance
/// decomposition of the OLS fit); factor shares plus residual sum to 1.
ErrorShares error_decompose(const std::vector<double>& errors,
                            const std::map<std::string, std::vector<double>>& factors);

} // namespace olymp::validation
