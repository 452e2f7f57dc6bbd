#include <catch2/catch_amalgamated.hpp>

#include "coach/coach_effect.hpp"
#include "common/error.hpp"
#include "synth/coach_generator.hpp"

#include <algorithm>
#include <cmath>

using namespace olymp;
using namespace olymp::coach;
using Catch::Approx;

TEST_CASE("ddd_fit exact and planted recovery", "[coach]") {
    synth::DddTruth exact;
    exact.noise = 0.0;
    exact.country_sd = 0.0;
    const auto clean = ddd_fit(synth::ddd_panel(80, 12, exact));
    CHECK(std::abs(clean.beta5 - 2.8) <= 1e-8);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(clean.beta[j] - exact.beta[j]) <= 1e-8);
    CHECK(clean.names[5] == "treat_x_post_x_sport[Swimming]");

    const auto noisy = ddd_fit(synth::ddd_panel(81));
    CHECK(std::abs(noisy.beta5 - 2.8) <= 2.0 * noisy.beta5_se);
    CHECK(noisy.n_clusters == 20);
    for (double p : noisy.p_values) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("ddd_fit rejects degenerate panels", "[coach]") {
    auto panel = synth::ddd_panel(82);
    for (auto& r : panel.rows) r.treat = false;
    CHECK_THROWS_AS(ddd_fit(panel), DomainError);

    panel = synth::ddd_panel(82);
    for (auto& r : panel.rows) r.post = r.treat;  // treated rows are all post
    CHECK_THROWS_AS(ddd_fit(panel), DomainError);

    panel = synth::ddd_panel(82);
    panel.focal_sport = "Rowing";
    CHECK_THROWS_AS(ddd_fit(panel), DomainError);

    panel = synth::ddd_panel(82);
    panel.rows[0].treat = !panel.rows[0].treat;
    CHECK_THROWS_AS(ddd_fit(panel), DomainError);
}

TEST_CASE("ddd beta5 is invariant to country-level shifts on balanced panels", "[coach][property]") {
    Rng rng = derived_rng(83, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto panel = synth::ddd_panel(84 + trial);
        const double base = ddd_fit(panel).beta5;
        std::map<std::string, double> shift;
        for (auto& r : panel.rows) {
            if (!shift.count(r.noc)) shift[r.noc] = normal(rng, 0.0, 5.0);
            r.medals += shift[r.noc];
        }
        CHECK(ddd_fit(panel).beta5 == Approx(base).margin(1e-9));
    }
}

TEST_CASE("compose_effect", "[coach]") {
    // 2.15 + 3.42 * 0.7 + 1.28 * 0.5
    CHECK(compose_effect(2.15, 3.42, 1.28, 0.7, 0.5) == Approx(5.184).epsilon(1e-14));
    CHECK(compose_effect(2.15, 3.42, 1.28) == compose_effect(2.15, 3.42, 1.28, 0.7, 0.5));
    CHECK(compose_effect(0, 0, 0) == 0.0);
    CHECK(compose_effect(1.5, 2.5, 4.0, 1.0, 1.0) == 8.0);
}

TEST_CASE("placebo_test", "[coach]") {
    synth::DddTruth null;
    null.beta[4] = 0.0;
    null.beta[5] = 0.0;
    const auto panel = synth::ddd_panel(85, 20, null);
    CHECK_THROWS_AS(placebo_test(panel, 0, 1), DomainError);
    CHECK_THROWS_AS(placebo_test(panel, 99, 1), DomainError);

    coach::CoachPanel tiny = synth::ddd_panel(85, 3, null);
    CHECK_THROWS_AS(placebo_test(tiny, 200, 1), DomainError);

    const auto a = placebo_test(panel, 400, 7);
    const auto b = placebo_test(panel, 400, 7);
    CHECK(a.gamma3 == b.gamma3);
    CHECK(a.p_value == b.p_value);
    CHECK(a.gamma3.size() == 400);
    CHECK(std::abs(a.mean) <= 2.0 * a.mc_standard_error);
    // Observed contrast is the difference of the two sports' difference-in-differences.
    std::map<std::string, double> cell;
    for (const auto& r : panel.rows) {
        const std::string key = std::string(r.treat ? "T" : "C") + (r.post ? "1" : "0") + r.sport;
        cell[key] += r.medals / 30.0;
    }
    auto did = [&](const std::string& s) { return (cell["T1" + s] - cell["T0" + s]) - (cell["C1" + s] - cell["C0" + s]); };
    CHECK(a.observed == Approx(did("Swimming") - did("Athletics")).margin(1e-10));

    const auto strong = placebo_test(synth::ddd_panel(86), 400, 7);
    CHECK(strong.p_value < 0.05);
}

TEST_CASE("event_study", "[coach]") {
    auto make = [](std::uint64_t seed, double slope, double noise) {
        Rng rng = derived_rng(seed, 0);
        std::vector<EventStudyRow> rows;
        for (int c = 0; c < 16; ++c) {
            const std::string noc = "E" + std::to_string(10 + c);
            const bool treated = c < 10;
            const int intro = 1996 + 4 * (c % 3);
            const double fe = normal(rng);
            for (int year = 1980; year <= 2024; year += 4) {
                double y = 5.0 + fe + 0.1 * (year - 1980) / 4.0;
                std::optional<int> iy;
                if (treated) {
                    iy = intro;
                    const int k = (year - intro) / 4;
                    if (year >= intro && k <= 5) y += slope * k;
                    if (year >= intro && k > 5) y += slope * 5;
                }
                rows.push_back({noc, year, y + normal(rng, 0.0, noise), iy});
            }
        }
        return rows;
    };
    const auto flat = event_study(make(87, 0.0, 0.0));
    for (double d : flat.delta) CHECK(std::abs(d) <= 1e-9);
    CHECK(flat.at(-1) == 0.0);

    const auto rows = make(88, 0.5, 0.3);
    const auto ramp = event_study(rows);
    REQUIRE(ramp.k.size() == 9);
    for (std::size_t i = 0; i < ramp.k.size(); ++i) {
        const double truth = ramp.k[i] >= 0 ? 0.5 * ramp.k[i] : 0.0;
        CHECK(std::abs(ramp.delta[i] - truth) <= 3.0 * ramp.se[i]);
    }
    CHECK(ramp.at(-1) == 0.0);
    CHECK(ramp.monotonicity > 0.9);

    auto shuffled = rows;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 31, shuffled.end());
    const auto again = event_study(shuffled);
    CHECK(again.delta == ramp.delta);
    CHECK(again.se == ramp.se);

    std::vector<EventStudyRow> short_rows;
    for (const auto& r : rows)
        if (!r.introduction_year || r.year < *r.introduction_year + 16) short_rows.push_back(r);
    try {
        event_study(short_rows);
        FAIL("expected missing support");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("k = 4, 5") != std::string::npos);
    }
}

TEST_CASE("screen_coach_cases", "[coach]") {
    std::map<std::string, std::map<std::string, std::map<int, double>>> medals;
    medals["CHN"]["Volleyball"] = {{1992, 1}, {1996, 2}, {2000, 3}, {2004, 5}, {2008, 6}, {2012, 7}};
    medals["USA"]["Volleyball"] = {{1992, 3}, {1996, 2}, {2000, 4}, {2004, 3}, {2008, 3}, {2012, 4}};
    const std::vector<CoachSpell> spells{{"CHN", "Volleyball", "lp", 2003, 2016, 1.0},
                                         {"USA", "Volleyball", "x", 2004, 2012, 1.0},
                                         {"FRA", "Volleyball", "y", 2004, 2012, 1.0}};
    const auto cases = screen_coach_cases(medals, spells);
    REQUIRE(cases.size() == 3);
    CHECK(cases[0].pre_mean == Approx(2.0));
    CHECK(cases[0].post_mean == Approx(6.0));
    CHECK(cases[0].pre_sd == Approx(1.0));
    CHECK(cases[0].z == Approx(4.0));
    CHECK(cases[0].flagged);
    CHECK_FALSE(cases[1].flagged);
    CHECK_FALSE(cases[2].flagged);
    CHECK(cases[2].z == 0.0);
}
