#include "validation/shapiro.hpp"

#include "common/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace olymp::validation {

namespace {

double poly(const double* c, int n, double x) {
    double r = c[0];
    if (n > 1) {
        double p = x * c[n - 1];
        for (int j = n - 2; j > 0; --j) p = (p + c[j]) * x;
        r += p;
    }
    return r;
}

} // namespace

ShapiroWilk shapiro_wilk(std::vector<double> x) {
    const int n = static_cast<int>(x.size());
    if (n < 3 || n > 5000) throw DomainError("shapiro_wilk: sample size must be in [3, 5000]");
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("shapiro_wilk: non-finite value");
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(x.front())))) throw DomainError("shapiro_wilk: constant sample");

    static const double g[] = {-2.273, 0.459};
    static const double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static const double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static const double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static const double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[] = {-0.4803, -0.082676, 0.0030302};

    const boost::math::normal_distribution<double> normal;
    const int nn2 = n / 2;
    std::vector<double> a(static_cast<std::size_t>(nn2) + 1, 0.0);  // 1-based half coefficients
    const double an = n;
    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (int i = 1; i <= nn2; ++i) {
            a[i] = boost::math::quantile(normal, (i - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - a[1] / ssumm2;
        int i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            const double a2 = -a[2] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (int i = i1; i <= nn2; ++i) a[i] /= -fac;
    }

    // Antisymmetric coefficient for sorted position i (0-based).
    auto coef = [&](int i) {
        const int j = n - 1 - i;
        if (i == j) return 0.0;
        return i < j ? -a[i + 1] : a[j + 1];
    };
    double sa = 0.0, sx = 0.0;
    for (int i = 0; i < n; ++i) {
        sa += coef(i);
        sx += x[i] / range;
    }
    sa /= n;
    sx /= n;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double asa = coef(i) - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    ShapiroWilk out;
    out.w = 1.0 - w1;

    if (n == 3) {
        const double pi6 = 1.90985931710274, stqr = 1.04719755119660;
        out.p = std::max(0.0, pi6 * (std::asin(std::sqrt(out.w)) - stqr));
        return out;
    }
    double y = std::log(w1);
    const double xx = std::log(an);
    double m, s;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            out.p = 1e-99;
            return out;
        }
        y = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        m = poly(c5, 4, xx);
        s = std::exp(poly(c6, 3, xx));
    }
    out.p = boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(m, s), y));
    return out;
}

} // namespace olymp::validation
