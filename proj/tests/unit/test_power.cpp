#include <catch2/catch_amalgamated.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "power/power_weights.hpp"
#include "support/fixture_panel.hpp"

#include <cmath>

using namespace olymp;
using namespace olymp::power;
using Catch::Approx;

TEST_CASE("impute_series interior, edge and empty cases", "[power]") {
    const std::vector<double> pool{7.0};
    const std::vector<TimedValue> mid{{2000, 10.0}, {2004, std::nullopt}, {2008, 30.0}};
    CHECK(impute_series(mid, pool) == std::vector<double>{10.0, 20.0, 30.0});

    const std::vector<TimedValue> none{{2000, std::nullopt}, {2004, std::nullopt}};
    CHECK(impute_series(none, pool) == std::vector<double>{7.0, 7.0});

    // Leading/trailing gaps take the country median.
    const std::vector<TimedValue> edges{{1996, std::nullopt}, {2000, 4.0}, {2004, 8.0}, {2008, 1.0}, {2012, std::nullopt}};
    CHECK(impute_series(edges, pool) == std::vector<double>{4.0, 4.0, 8.0, 1.0, 4.0});

    CHECK_THROWS_AS(impute_series(none, std::vector<double>{}), DomainError);
    const std::vector<TimedValue> unsorted{{2004, 1.0}, {2000, 2.0}};
    CHECK_THROWS_AS(impute_series(unsorted, pool), DomainError);

    const std::vector<TimedValue> tiny{{2000, std::nullopt}};
    CHECK(impute_series(tiny, std::vector<double>{0.0}, kPopulationFloor) == std::vector<double>{1.0});
}

namespace {

// Reference interpolator: per-point scan for the nearest observations either side.
std::vector<double> reference_impute(const std::vector<TimedValue>& s, double global_median) {
    std::vector<double> obs;
    for (const auto& v : s)
        if (v.value) obs.push_back(*v.value);
    double own_median = global_median;
    if (!obs.empty()) {
        std::sort(obs.begin(), obs.end());
        const std::size_t n = obs.size();
        own_median = n % 2 ? obs[n / 2] : (obs[n / 2 - 1] + obs[n / 2]) / 2.0;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].value) {
            out.push_back(*s[i].value);
            continue;
        }
        int lo = -1, hi = -1;
        for (int j = static_cast<int>(i) - 1; j >= 0; --j)
            if (s[j].value) { lo = j; break; }
        for (std::size_t j = i + 1; j < s.size(); ++j)
            if (s[j].value) { hi = static_cast<int>(j); break; }
        if (lo < 0 || hi < 0) {
            out.push_back(own_median);
        } else {
            const double f = double(s[i].year - s[lo].year) / double(s[hi].year - s[lo].year);
            out.push_back(*s[lo].value * (1 - f) + *s[hi].value * f);
        }
    }
    return out;
}

} // namespace

TEST_CASE("impute_series matches a reference interpolator", "[power][property]") {
    Rng rng = derived_rng(21, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TimedValue> s;
        int year = 1896;
        const std::size_t n = 1 + uniform_index(rng, 15);
        for (std::size_t i = 0; i < n; ++i) {
            year += 4 * static_cast<int>(1 + uniform_index(rng, 2));
            s.push_back({year, bernoulli(rng, 0.4) ? std::nullopt : std::optional<double>(uniform(rng, 0.0, 100.0))});
        }
        const std::vector<double> pool{3.0, 9.0, 12.0};
        const auto got = impute_series(s, pool);
        const auto want = reference_impute(s, 9.0);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == Approx(want[i]).margin(1e-12));
            if (s[i].value) CHECK(got[i] == *s[i].value); // observations preserved exactly
        }
    }
}

TEST_CASE("national_weight formula", "[power]") {
    CHECK(national_weight(0, 500.0, 30.0, 2000, 2024) == 0.0);
    CHECK(national_weight(100, 10000.0, 100.0, 2024, 2024, 0.05) ==
          Approx(std::log(101.0) / (std::log(10000.0) * 10.0)).epsilon(1e-14));
    CHECK(national_weight(100, 10000.0, 100.0, 2024, 2024, 0.05) == Approx(0.05011).margin(5e-6));
    // GDP below e: denominator floored at 1.
    CHECK(national_weight(3, 1e-6, 1.0, 2024, 2024) == Approx(std::log(4.0)).epsilon(1e-14));
    CHECK_THROWS_AS(national_weight(1, 10, 1, 2028, 2024), DomainError);
    CHECK_THROWS_AS(national_weight(-1, 10, 1, 2000, 2024), DomainError);
}

TEST_CASE("decay factor and half-life", "[power]") {
    const double h = half_life(0.05);
    CHECK(h == Approx(13.862943611198906).epsilon(1e-14));
    CHECK(std::exp(-0.05 * h) == Approx(0.5).epsilon(1e-14));
    // The nominal "20-year" half-life is only approximate at lambda = 0.05.
    CHECK(std::exp(-0.05 * 20.0) == Approx(0.3679).margin(1e-4));
    CHECK(std::exp(-0.05 * 14.0) == Approx(0.4966).margin(1e-4));
}

TEST_CASE("national_weight monotonicity", "[power][property]") {
    Rng rng = derived_rng(22, 0);
    for (int k = 0; k < 500; ++k) {
        const double m = std::floor(uniform(rng, 0, 100));
        const double g = uniform(rng, 1e-6, 1e5), p = uniform(rng, 1, 1500);
        const int t = 1896 + static_cast<int>(uniform_index(rng, 120));
        CHECK(national_weight(m + 1, g, p, t, 2024) >= national_weight(m, g, p, t, 2024));
        CHECK(national_weight(m, g, p, t, 2024) <= national_weight(m, g, p, std::min(t + 4, 2024), 2024));
        CHECK(national_weight(m, g, p, t, 2024) >= 0.0);
    }
}

TEST_CASE("impute_panel fills and floors", "[power]") {
    Panel p{{"AAA", 2000, 0, 0, 0, 0, 10.0, std::nullopt, 1, false},
            {"AAA", 2004, 0, 0, 0, 0, std::nullopt, 2.0, 1, false},
            {"AAA", 2008, 0, 0, 0, 0, 30.0, 0.5, 1, false},
            {"BBB", 2000, 0, 0, 0, 0, -3.0, std::nullopt, 1, false}};
    impute_panel(p);
    for (const auto& r : p) {
        REQUIRE(r.gdp);
        REQUIRE(r.population);
        CHECK(*r.gdp >= kGdpFloor);
        CHECK(*r.population >= kPopulationFloor);
    }
    CHECK(*p[1].gdp == Approx(20.0));
    CHECK(*p[3].gdp == Approx(20.0)); // negative treated as missing -> global median of {10, 30}
    CHECK(*p[2].population == 1.0);   // floored
}

TEST_CASE("bootstrap_cv", "[power]") {
    Panel constant(10, PanelRecord{"AAA", 2000, 1, 1, 1, 3, 50.0, 4.0, 10, false});
    const auto c = bootstrap_cv(constant, 200, 1, 2024);
    CHECK(c.gdp <= 1e-12);
    CHECK(c.population <= 1e-12);
    CHECK(c.decay <= 1e-12);

    CHECK_THROWS_AS(bootstrap_cv(Panel(1, constant[0]), 200, 1, 2024), DomainError);
    CHECK_THROWS_AS(bootstrap_cv(constant, 99, 1, 2024), DomainError);

    // Two rows: enumerate the four equally likely resamples for the exact CV.
    Panel two{{"AAA", 2024, 1, 0, 0, 1, 100.0, 4.0, 1, false}, {"BBB", 2004, 1, 0, 0, 1, 10000.0, 25.0, 1, false}};
    auto exact_cv = [](double a, double b) {
        const double means[4] = {a, (a + b) / 2, (a + b) / 2, b};
        double mu = 0, var = 0;
        for (double m : means) mu += m / 4;
        for (double m : means) var += (m - mu) * (m - mu) / 4;
        return std::sqrt(var) / mu;
    };
    const auto cv = bootstrap_cv(two, 40000, 5, 2024);
    CHECK(cv.gdp == Approx(exact_cv(1 / std::log(100.0), 1 / std::log(10000.0))).margin(0.01));
    CHECK(cv.population == Approx(exact_cv(0.5, 0.2)).margin(0.01));
    CHECK(cv.decay == Approx(exact_cv(1.0, std::exp(-1.0))).margin(0.01));

    const auto again = bootstrap_cv(two, 500, 5, 2024);
    CHECK(again.gdp == bootstrap_cv(two, 500, 5, 2024).gdp);
}

TEST_CASE("bootstrap CVs on the shipped fixture panel stay below 0.15", "[power]") {
    Panel panel = test::fixture_panel();
    impute_panel(panel);
    const auto cv = bootstrap_cv(panel, 1000, 2024, 2024);
    CHECK(cv.gdp < 0.15);
    CHECK(cv.population < 0.15);
    CHECK(cv.decay < 0.15);
}
