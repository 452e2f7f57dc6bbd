#include "validation/backtest.hpp"

#include "common/error.hpp"
#include "regress/regress.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace olymp::validation {

void validate_series(const BacktestSeries& series) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& p = series[i];
        if (!(p.observed >= 0.0) || !(p.predicted >= 0.0) || !std::isfinite(p.observed) || !std::isfinite(p.predicted))
            throw DomainError("backtest: values must be finite and non-negative (year " + std::to_string(p.year) + ")");
        if (i > 0 && p.year <= series[i - 1].year) throw DomainError("backtest: years must be strictly increasing");
    }
}

double smape_window(const BacktestSeries& series, int t, int h) {
    if (h < 0) throw DomainError("smape_window: negative half-width");
    validate_series(series);
    double sum = 0.0;
    int n = 0;
    for (const auto& p : series) {
        if (p.year < t - h || p.year > t + h) continue;
        const double denom = std::abs(p.observed) + std::abs(p.predicted);
        if (denom == 0.0)
            throw DomainError("smape_window: observed and predicted both zero in " + std::to_string(p.year));
        sum += 2.0 * std::abs(p.observed - p.predicted) / denom;
        ++n;
    }
    if (n == 0) throw DomainError("smape_window: empty window around " + std::to_string(t));
    return 100.0 * sum / n;
}

std::vector<Era> default_eras() {
    return {{"Cold War", 1976, 1991}, {"Globalization", 1992, 2016}, {"COVID-19", 2017, 2024}};
}

std::vector<EraSmape> era_smape(const BacktestSeries& series, const std::vector<Era>& eras, int h) {
    std::vector<EraSmape> out;
    for (const auto& e : eras) {
        EraSmape r{e, 0.0, 0};
        for (const auto& p : series) {
            if (p.year < e.from || p.year > e.to) continue;
            r.smape += smape_window(series, p.year, h);
            ++r.n;
        }
        if (r.n == 0) throw DomainError("era_smape: no observations in era " + e.name);
        r.smape /= r.n;
        out.push_back(r);
    }
    return out;
}

std::string format_era_report(const std::vector<EraSmape>& rows) {
    std::ostringstream os;
    os << "era,from,to,smape\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.1f", r.smape);
        os << r.era.name << ',' << r.era.from << ',' << r.era.to << ',' << buf << '\n';
    }
    return os.str();
}

namespace {

// Prefix sums for O(1) segment OLS.
struct Prefix {
    std::vector<long double> n, sx, sy, sxx, sxy, syy;

    Prefix(const std::vector<double>& x, const std::vector<double>& y) {
        const std::size_t m = x.size();
        n.assign(m + 1, 0);
        sx = sy = sxx = sxy = syy = n;
        for (std::size_t i = 0; i < m; ++i) {
            n[i + 1] = n[i] + 1;
            sx[i + 1] = sx[i] + x[i];
            sy[i + 1] = sy[i] + y[i];
            sxx[i + 1] = sxx[i] + (long double)x[i] * x[i];
            sxy[i + 1] = sxy[i] + (long double)x[i] * y[i];
            syy[i + 1] = syy[i] + (long double)y[i] * y[i];
        }
    }

    double ssr(std::size_t a, std::size_t b) const {
        const long double k = n[b] - n[a], X = sx[b] - sx[a], Y = sy[b] - sy[a];
        const long double cxx = (sxx[b] - sxx[a]) - X * X / k;
        const long double cxy = (sxy[b] - sxy[a]) - X * Y / k;
        const long double cyy = (syy[b] - syy[a]) - Y * Y / k;
        const long double r = cxx > 0 ? cyy - cxy * cxy / cxx : cyy;
        return static_cast<double>(std::max<long double>(r, 0.0L));
    }
};

Segment fit_segment(const std::vector<double>& x, const std::vector<double>& y, std::size_t a, std::size_t b) {
    const auto m = static_cast<Eigen::Index>(b - a);
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = x[a + static_cast<std::size_t>(i)];
        v(i) = y[a + static_cast<std::size_t>(i)];
    }
    const auto f = regress::ols(regress::DesignMatrix(X, {"const", "x"}), v);
    return {a, b, f.coefficients(0), f.coefficients(1), f.standard_errors(0), f.standard_errors(1), f.ssr};
}

} // namespace

BreakResult detect_breaks(const std::vector<double>& x, const std::vector<double>& y, int max_breaks,
                          int min_segment) {
    if (x.size() != y.size()) throw DomainError("detect_breaks: x and y lengths differ");
    if (max_breaks < 0) throw DomainError("detect_breaks: negative max_breaks");
    if (min_segment < 3) throw DomainError("detect_breaks: min_segment must be at least 3");
    const std::size_t n = x.size(), h = static_cast<std::size_t>(min_segment);
    if (n < static_cast<std::size_t>(max_breaks + 1) * h)
        throw DomainError("detect_breaks: series too short for " + std::to_string(max_breaks) + " breaks of minimum length " +
                          std::to_string(min_segment));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("detect_breaks: non-finite input");
        if (i > 0 && x[i] <= x[i - 1]) throw DomainError("detect_breaks: x must be strictly increasing");
    }

    const Prefix pre(x, y);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t M = static_cast<std::size_t>(max_breaks);
    // best[m][j]: minimal SSR covering [0, j) with m breaks; arg stores the last segment start.
    std::vector<std::vector<double>> best(M + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> arg(M + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t j = h; j <= n; ++j) best[0][j] = pre.ssr(0, j);
    for (std::size_t m = 1; m <= M; ++m)
        for (std::size_t j = (m + 1) * h; j <= n; ++j)
            for (std::size_t s = m * h; s + h <= j; ++s) {
                if (best[m - 1][s] == inf) continue;
                const double c = best[m - 1][s] + pre.ssr(s, j);
                if (c < best[m][j]) {
                    best[m][j] = c;
                    arg[m][j] = s;
                }
            }

    BreakResult out;
    const double dn = static_cast<double>(n);
    std::size_t chosen = 0;
    for (std::size_t m = 0; m <= M; ++m) {
        const double ssr = best[m][n];
        out.ssr_by_count.push_back(ssr);
        const double k = 2.0 * static_cast<double>(m + 1) + static_cast<double>(m);
        const double bic = dn * std::log(std::max(ssr, 1e-300) / dn) + k * std::log(dn);
        out.bic_by_count.push_back(bic);
        if (bic < out.bic_by_count[chosen] - 1e-9) chosen = m;
    }

    std::vector<std::size_t> starts;
    std::size_t j = n;
    for (std::size_t m = chosen; m > 0; --m) {
        const std::size_t s = arg[m][j];
        starts.push_back(s);
        j = s;
    }
    std::reverse(starts.begin(), starts.end());
    out.breaks = starts;
    std::vector<std::size_t> bounds{0};
    bounds.insert(bounds.end(), starts.begin(), starts.end());
    bounds.push_back(n);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) out.segments.push_back(fit_segment(x, y, bounds[k], bounds[k + 1]));
    out.ssr = 0.0;
    for (const auto& s : out.segments) out.ssr += s.ssr;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        out.break_x.push_back(x[starts[k]]);
        const auto& left = out.segments[k];
        const auto& right = out.segments[k + 1];
        const double restricted = pre.ssr(left.begin, right.end);
        const double unrestricted = left.ssr + right.ssr;
        const double df2 = static_cast<double>(right.end - left.begin) - 4.0;
        double F = inf, p = 0.0;
        if (unrestricted > 0.0 && df2 > 0.0) {
            F = ((restricted - unrestricted) / 2.0) / (unrestricted / df2);
            p = boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(2.0, df2),
                                                         std::max(F, 0.0)));
        }
        out.sup_f.push_back(F);
        out.sup_f_p.push_back(p);
    }
    return out;
}

ErrorShares error_decompose(const std::vector<double>& errors,
                            const std::map<std::string, std::vector<double>>& factors) {
    const std::size_t n = errors.size();
    if (n < 3) throw DomainError("error_decompose: need at least 3 observations");
    if (factors.empty()) throw DomainError("error_decompose: no factors");
    std::vector<std::string> names{"const"};
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(factors.size() + 1));
    X.col(0).setOnes();
    Eigen::Index c = 1;
    for (const auto& [name, series] : factors) {
        if (series.size() != n) throw DomainError("error_decompose: factor '" + name + "' has the wrong length");
        for (std::size_t i = 0; i < n; ++i) X(static_cast<Eigen::Index>(i), c) = series[i];
        names.push_back(name);
        ++c;
    }
    const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(errors.data(), static_cast<Eigen::Index>(n));
    const auto fit = regress::ols(regress::DesignMatrix(X, names), e);
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum();
    ErrorShares out;
    if (var == 0.0) {
        for (const auto& [name, _] : factors) out.factor[name] = 0.0;
        out.residual = 1.0;
        return out;
    }
    double explained = 0.0;
    c = 1;
    for (const auto& [name, _] : factors) {
        const Eigen::VectorXd f = X.col(c);
        const double cov = (f.array() - f.mean()).matrix().dot((e.array() - mean).matrix());
        const double share = fit.coefficients(c) * cov / var;
        out.factor[name] = share;
        explained += share;
        ++c;
    }
    out.residual = 1.0 - explained;
    return out;
}

} // namespace olymp::validation
