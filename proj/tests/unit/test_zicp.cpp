#include <catch2/catch_amalgamated.hpp>

#include "common/rng.hpp"
#include "regress/regress.hpp"
#include "synth/zicp_generator.hpp"
#include "zicp/bocpd.hpp"
#include "zicp/zicp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace olymp;
using namespace olymp::zicp;
using Catch::Approx;

TEST_CASE("structural_zero_prob and zero_prob", "[zicp]") {
    CHECK(structural_zero_prob(0.3, 0.7, {0, 0, 0}) == 0.5);
    double prev = 0.0;
    for (double a0 : {0.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
        const double p = structural_zero_prob(0, 0, {a0, 0, 0});
        CHECK(p > prev);
        prev = p;
    }
    CHECK(prev == Approx(1.0).margin(1e-15));
    CHECK(structural_zero_prob(1, 2, {-1, 2, 0.5}) == Approx(0.8807970779778823).epsilon(1e-14));

    CHECK(zero_prob(1.0, 7.0, 1.0) == 1.0);
    CHECK(zero_prob(0.0, 0.0, 1.0) == 1.0);
    CHECK(zero_prob(0.3, 0.5, 1.0) == Approx(0.7245714617988434).epsilon(1e-14));
    CHECK_THROWS_AS(zero_prob(1.2, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(zero_prob(0.2, -0.5, 1.0), DomainError);
    CHECK_THROWS_AS(zero_prob(0.2, 0.5, 0.0), DomainError);
}

TEST_CASE("zero_prob is monotone in pi and lambda", "[zicp][property]") {
    Rng rng = derived_rng(61, 0);
    for (int k = 0; k < 2000; ++k) {
        const double pi = uniform01(rng), lam = uniform(rng, 0, 5), T = uniform(rng, 0.1, 3);
        const double dpi = uniform(rng, 0, 1 - pi), dlam = uniform(rng, 0, 5);
        const double base = zero_prob(pi, lam, T);
        CHECK(zero_prob(pi + dpi, lam, T) >= base);
        CHECK(zero_prob(pi, lam + dlam, T) <= base);
        CHECK(base >= std::exp(-lam * T) - 1e-15);
        CHECK(base <= 1.0);
    }
}

TEST_CASE("dynamic_gain", "[zicp]") {
    const std::array<double, 3> theta{1.7, -0.4, 0.9};
    CHECK(dynamic_gain({}, theta, 1.0, 0.33, 0, 5) == 0.0);
    ResourceHistory zeros{{0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}};
    CHECK(dynamic_gain(zeros, theta, 1.0, 0.33, 0, 5) == 0.0);

    ResourceHistory pulse{{10, 1.0, 0, 0, 0}};
    CHECK(dynamic_gain(pulse, {1, 0, 0}, 1.0, 0.33, 10, 13) == Approx(std::exp(-0.99)).epsilon(1e-14));
    CHECK(std::abs(std::exp(-0.99) - 0.37) <= 0.01);

    ResourceHistory a{{2, 1.0, 0.5, 3.0, 0.2}}, b{{4, -0.3, 2.0, 1.0, 0.5}};
    ResourceHistory both{a[0], b[0]};
    const double eta = 0.33, rate = 0.7;
    const double term_a = (1.7 * 1.0 - 0.4 * 0.5 + 0.9 * (3.0 + rate * 0.2)) * std::exp(-eta * 4);
    const double term_b = (1.7 * -0.3 - 0.4 * 2.0 + 0.9 * (1.0 + rate * 0.5)) * std::exp(-eta * 2);
    CHECK(dynamic_gain(both, theta, rate, eta, 0, 6) == Approx(term_a + term_b).epsilon(1e-13));
    // Cycles before t0 or after t are excluded.
    CHECK(dynamic_gain(both, theta, rate, eta, 3, 6) == Approx(term_b).epsilon(1e-13));
    CHECK(dynamic_gain(both, theta, rate, eta, 0, 3) == Approx(term_a * std::exp(eta * 4) * std::exp(-eta * 1)).epsilon(1e-13));

    CHECK_THROWS_AS(dynamic_gain(both, theta, rate, eta, 5, 4), DomainError);
    CHECK_THROWS_AS(dynamic_gain(both, theta, rate, 0.0, 0, 4), DomainError);
    CHECK_THROWS_AS(dynamic_gain({b[0], a[0]}, theta, rate, eta, 0, 6), DomainError);
}

TEST_CASE("dynamic_gain is linear in theta", "[zicp][property]") {
    Rng rng = derived_rng(62, 0);
    for (int trial = 0; trial < 200; ++trial) {
        ResourceHistory h;
        int cycle = static_cast<int>(uniform_index(rng, 5));
        for (int k = 0; k < 6; ++k) {
            cycle += 1 + static_cast<int>(uniform_index(rng, 2));
            h.push_back({cycle, normal(rng), normal(rng), normal(rng), normal(rng)});
        }
        std::array<double, 3> t1{normal(rng), normal(rng), normal(rng)}, t2{normal(rng), normal(rng), normal(rng)};
        const double c = normal(rng);
        std::array<double, 3> mix{};
        for (int j = 0; j < 3; ++j) mix[j] = t1[j] + c * t2[j];
        const int t = cycle + 1;
        const double lhs = dynamic_gain(h, mix, 0.5, 0.33, 0, t);
        const double rhs = dynamic_gain(h, t1, 0.5, 0.33, 0, t) + c * dynamic_gain(h, t2, 0.5, 0.33, 0, t);
        CHECK(lhs == Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("intensity and decay_covariate", "[zicp]") {
    ZicpModel m;
    m.beta = {0.3, 0.2, 0.01};
    CHECK(intensity(m, 2.0, 30.0, 0.0) == Approx(std::exp(0.3 + 0.4 + 0.3)).epsilon(1e-15));
    m.beta = {0, 0, 0};
    m.gamma = 1.0;
    CHECK(intensity(m, 5.0, 12.0, 1.0) == 2.0);
    CHECK_THROWS_AS(intensity(m, 0.0, 0.0, -1.0), DomainError);
    CHECK_THROWS_AS(intensity(m, 0.0, 0.0, -3.0), DomainError);
    m.beta = {-1.25, 0.731, 0.0123};
    m.gamma = 0.37;
    const long double direct = std::exp(-1.25L + 0.731L * 4.2L + 0.0123L * 57.0L) * (1.0L + 0.37L * 1.9L);
    CHECK(intensity(m, 4.2, 57.0, 1.9) == Approx(static_cast<double>(direct)).epsilon(1e-14));

    CHECK(decay_covariate(3.5, 0.33, 0.0) == 3.5);
    CHECK(decay_covariate(1.0, 0.33, 3.0) == Approx(0.3716).margin(1e-4));
    Rng rng = derived_rng(63, 0);
    for (int k = 0; k < 200; ++k) {
        const double x = normal(rng), nu = uniform(rng, 0, 1), a = uniform(rng, 0, 5), b = uniform(rng, 0, 5);
        CHECK(decay_covariate(decay_covariate(x, nu, a), nu, b) == Approx(decay_covariate(x, nu, a + b)).margin(1e-14));
    }
    CHECK_THROWS_AS(decay_covariate(1.0, -0.1, 1.0), DomainError);
    CHECK_THROWS_AS(decay_covariate(1.0, 0.1, -1.0), DomainError);
}

TEST_CASE("derive_histories and build_observations", "[zicp]") {
    Panel panel{
        {"AAA", 2016, 0, 0, 0, 0, 10.0, 2.0, 20, false},
        {"AAA", 2020, 0, 0, 0, 0, 12.0, 2.0, 0, false},
        {"AAA", 2024, 0, 1, 0, 1, 14.0, 2.0, 26, false},
    };
    std::vector<CoachSpell> coaches{{"AAA", "Swimming", "c1", 2018, 2024, 0.8}, {"BBB", "Swimming", "c2", 2000, 2030, 5}};
    const auto h = derive_histories(panel, coaches);
    REQUIRE(h.at("AAA").size() == 3);
    const auto& c = h.at("AAA");
    CHECK(c[0].cycle == cycle_of_year(2016));
    CHECK(c[0].coach_input == 0.0);
    CHECK(c[1].coach_input == 0.8);
    CHECK(c[1].event_experience == 1.0);
    CHECK(c[2].event_experience == 1.0);
    CHECK(c[1].athlete_growth == -20.0);
    CHECK(c[1].athlete_rate == -1.0);
    CHECK(c[2].athlete_growth == 26.0);
    CHECK(c[2].athlete_rate == 0.0);

    const auto obs = build_observations(panel, h, {}, 0.33, 1.0);
    REQUIRE(obs.size() == 3);
    CHECK(obs[0].s1 == 1.0);
    CHECK(build_observations(panel, h, {400.0}, 0.33, 1.0)[0].s1 == 0.0);
    CHECK(obs[2].s2 == 1.0);
    CHECK(obs[1].s2 == 0.0);
    CHECK(obs[2].log_gdp == Approx(std::log(14.0)));
    CHECK(obs[2].gain[0] == Approx(0.8 * std::exp(-0.33) + 0.8));

    Panel missing = panel;
    missing[0].gdp.reset();
    CHECK_THROWS_AS(build_observations(missing, h, {}, 0.33, 1.0), DomainError);
}

TEST_CASE("EM recovers the generator on a 2000-row panel", "[zicp]") {
    const auto data = synth::zip_panel(64, 200, 10);
    const auto fit = zicp::fit(data);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
        CHECK(fit.objective_trace[k] >= fit.objective_trace[k - 1] - 1e-9 * std::abs(fit.objective_trace[k - 1]));
    const double mean_pi = std::accumulate(fit.pi.begin(), fit.pi.end(), 0.0) / static_cast<double>(fit.pi.size());
    CHECK(std::abs(mean_pi - 0.4) <= 0.05);
    const synth::ZipTruth truth;
    for (int j = 0; j < 3; ++j) CHECK(std::abs(fit.model.beta[j] - truth.beta[j]) <= 0.1 * std::abs(truth.beta[j]));
    CHECK(fit.model.fitted);
    CHECK(fit.model.gamma > 0.0);
    CHECK(fit.model.theta[0] > 0.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i].count > 0) CHECK(fit.responsibilities[i] == 0.0);
}

TEST_CASE("EM without zeros reduces to the penalised Poisson fit", "[zicp]") {
    synth::ZipTruth truth;
    truth.pi = 0.0;
    truth.beta = {2.5, 0.2, 0.01};
    truth.phi = {0, 0, 0};
    auto data = synth::zip_panel(65, 30, 5, truth);
    for (auto& o : data) {
        o.count = std::max(1.0, o.count);
        o.gain = {0, 0, 0};
    }
    const auto fit = zicp::fit(data);
    CHECK(*std::max_element(fit.responsibilities.begin(), fit.responsibilities.end()) == 0.0);
    CHECK(*std::max_element(fit.pi.begin(), fit.pi.end()) < 1e-10);

    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), 3);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto& o = data[static_cast<std::size_t>(i)];
        X.row(i) << 1.0, o.log_gdp, o.athlete_count;
        y(i) = o.count;
    }
    regress::PoissonOptions po;
    po.tolerance = 1e-10;
    const auto direct = regress::elastic_net_poisson(regress::DesignMatrix(X, {}), y, 0.1, 0.05, po);
    for (int j = 0; j < 3; ++j) CHECK(fit.model.beta[j] == Approx(direct.coefficients(j)).margin(1e-5));
}

TEST_CASE("EM lowers pi for a zero-medal country that grows out of poverty", "[zicp]") {
    // Poor, absent countries never medal; the grower stays medal-less for ten
    // Games while GDP rises 5% per cycle and crosses the per-capita threshold.
    Panel panel;
    Rng rng = derived_rng(66, 0);
    for (int c = 0; c < 30; ++c) {
        const bool poor = c < 12;
        for (int t = 0; t < 10; ++t) {
            PanelRecord r;
            r.noc = "N" + std::to_string(10 + c);
            r.year = 1988 + 4 * t;
            r.population = 10.0;
            r.gdp = poor ? 50.0 : uniform(rng, 300.0, 3000.0);
            r.athlete_count = poor ? 0 : 10 + static_cast<int>(uniform_index(rng, 40));
            r.total = poor ? 0 : static_cast<int>(poisson(rng, std::exp(0.3 + 0.03 * r.athlete_count)));
            panel.push_back(r);
        }
    }
    for (int t = 0; t < 10; ++t) {
        PanelRecord r;
        r.noc = "GRW";
        r.year = 1988 + 4 * t;
        r.population = 10.0;
        r.gdp = 160.0 * std::pow(1.05, 2 * t);
        r.athlete_count = 4;
        panel.push_back(r);
    }
    const auto obs = build_observations(panel, {}, {}, 0.33, 1.0);
    const auto fit = zicp::fit(obs);
    double first = -1, last = -1;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i].noc != "GRW") continue;
        if (obs[i].year == 1988) first = fit.pi[i];
        if (obs[i].year == 2024) last = fit.pi[i];
    }
    CHECK(last < first);
}

TEST_CASE("fit preconditions", "[zicp]") {
    auto data = synth::zip_panel(67, 12, 4);
    auto zeros = data;
    for (auto& o : zeros) o.count = 0.0;
    CHECK_THROWS_AS(zicp::fit(zeros), DomainError);
    CHECK_THROWS_AS(zicp::fit(synth::zip_panel(67, 9, 4)), DomainError);
    CHECK_THROWS_AS(zicp::fit(synth::zip_panel(67, 12, 2)), DomainError);
    FitOptions o;
    o.max_iter = 1;
    try {
        zicp::fit(data, o);
        FAIL("expected non-convergence");
    } catch (const EmNonConvergenceError& e) {
        CHECK(e.objective_trace().size() == 2);
        CHECK(e.last_iterate().size() == 9);
    }
}

TEST_CASE("bocpd recursion", "[zicp][bocpd]") {
    auto s = BocpdState::initial();
    auto u = bocpd_step(s, 3.0);
    REQUIRE(u.state.run_length_posterior.size() == 1);
    CHECK(u.state.run_length_posterior[0] == 1.0);
    CHECK_THROWS_AS(bocpd_step(s, -1.0), DomainError);
    CHECK_THROWS_AS(BocpdState::initial({1.0, 1.0, 1.0}), DomainError);

    Rng rng = derived_rng(68, 0);
    s = BocpdState::initial();
    std::size_t prev_mode = 0;
    for (int t = 0; t < 200; ++t) {
        u = bocpd_step(s, 4.0);
        u.state.validate();
        const auto& post = u.state.run_length_posterior;
        const double sum = std::accumulate(post.begin(), post.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        const auto mode = static_cast<std::size_t>(std::max_element(post.begin(), post.end()) - post.begin());
        if (t > 0) CHECK(mode == prev_mode + 1);
        prev_mode = mode;
        s = std::move(u.state);
    }
    // Random streams keep a valid posterior.
    s = BocpdState::initial({0.05, 2.0, 0.5});
    for (int t = 0; t < 300; ++t) {
        u = bocpd_step(s, static_cast<double>(poisson(rng, t < 150 ? 1.0 : 30.0)));
        const auto& post = u.state.run_length_posterior;
        CHECK(std::abs(std::accumulate(post.begin(), post.end(), 0.0) - 1.0) <= 1e-9);
        CHECK(std::all_of(post.begin(), post.end(), [](double p) { return p >= 0.0; }));
        s = std::move(u.state);
    }
}

TEST_CASE("bocpd localises a planted rate jump", "[zicp][bocpd]") {
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng = derived_rng(69, static_cast<std::uint64_t>(seed));
        std::vector<double> xs;
        for (int t = 0; t < 100; ++t) xs.push_back(static_cast<double>(poisson(rng, t < 50 ? 2.0 : 12.0)));
        const auto scan = scan_changepoints(xs);
        if (scan.most_likely_change && std::abs(static_cast<int>(*scan.most_likely_change) - 50) <= 2) ++hits;
    }
    CHECK(hits >= 90);

    std::vector<double> flat(80, 3.0);
    const auto calm = scan_changepoints(flat);
    CHECK_FALSE(calm.most_likely_change.has_value());
    CHECK_FALSE(calm.refit_recommended);
    std::vector<double> jump = flat;
    jump.insert(jump.end(), 5, 40.0);
    const auto jumped = scan_changepoints(jump);
    CHECK(jumped.refit_recommended);
    CHECK(jumped.changepoint_prob[80] > kRefitThreshold);
    CHECK(*jumped.most_likely_change == 80);
}

TEST_CASE("predict_first_medal", "[zicp]") {
    ZicpModel m;
    CHECK_THROWS_AS(predict_first_medal(m, {}), StateError);
    m.fitted = true;
    m.alpha = {800, 0, 0};
    CHECK(predict_first_medal(m, {{"AAA", 1.0, 5.0}})[0].probability == 0.0);
    m.alpha = {-800, 0, 0};
    m.beta = {50, 0, 0};
    CHECK(predict_first_medal(m, {{"AAA", 1.0, 5.0}})[0].probability == Approx(1.0).margin(1e-15));

    Rng rng = derived_rng(70, 0);
    m.alpha = {-0.4, 1.1, 0.6};
    m.beta = {-2.0, 0.3, 0.02};
    m.gamma = 0.5;
    m.theta = {0.5, 0.2, 0.3};
    std::vector<FirstMedalFeatures> feats;
    for (int k = 0; k < 40; ++k) {
        FirstMedalFeatures f;
        f.noc = "Z" + std::to_string(10 + k);
        f.log_gdp = uniform(rng, -1, 4);
        f.athlete_count = std::floor(uniform(rng, 0, 60));
        f.s1 = bernoulli(rng, 0.5);
        f.s2 = bernoulli(rng, 0.2);
        f.gain = {uniform01(rng), uniform01(rng), uniform01(rng)};
        feats.push_back(f);
    }
    feats.push_back(feats.front());
    feats.back().noc = "AAA";  // exact tie with Z10
    const auto ranked = predict_first_medal(m, feats);
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        CHECK(ranked[k].probability >= 0.0);
        CHECK(ranked[k].probability <= 1.0);
        if (k > 0) {
            CHECK(ranked[k].probability <= ranked[k - 1].probability);
            if (ranked[k].probability == ranked[k - 1].probability) CHECK(ranked[k - 1].noc < ranked[k].noc);
        }
    }
    auto shuffled = feats;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
    const auto again = predict_first_medal(m, shuffled);
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        CHECK(again[k].noc == ranked[k].noc);
        CHECK(again[k].probability == ranked[k].probability);
    }
}

TEST_CASE("first-medal table round trip", "[zicp]") {
    const std::vector<FirstMedalForecast> rows{{"ANG", 26, 6, 0.3, 0.762}, {"BOT", 19, 3, 0.1875, 0.726}};
    const auto text = format_first_medal_table(rows);
    CHECK(text == "NOC,AthleteCount,AthleteGrowth,AthleteRate,Probability\nANG,26,6,0.3000,0.762\nBOT,19,3,0.1875,0.726\n");
    const auto back = parse_first_medal_table(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].noc == "ANG");
    CHECK(back[0].athlete_count == 26);
    CHECK(back[0].athlete_growth == 6);
    CHECK(back[0].athlete_rate == 0.3);
    CHECK(back[0].probability == 0.762);
    CHECK(format_first_medal_table(back) == text);
    CHECK_THROWS_AS(parse_first_medal_table("noc,x\n"), DomainError);
    CHECK_THROWS_AS(parse_first_medal_table("NOC,AthleteCount,AthleteGrowth,AthleteRate,Probability\nANG,x,1,1,1\n"),
                    DomainError);
}
