#include <catch2/catch_amalgamated.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "influence/influence.hpp"
#include "synth/pagerank_oracle.hpp"

#include <numeric>

using namespace olymp;
using namespace olymp::influence;
using Catch::Approx;

TEST_CASE("event_scores", "[influence]") {
    const auto m = event_scores({{"KEN", "Marathon", 2000, 2, 1, 10}}, {});
    CHECK(m.at("KEN", "Marathon") == Approx(20.0).epsilon(1e-15));

    CHECK(event_scores({{"KEN", "Marathon", 2000, 0, 3, 10}}, {}).at("KEN", "Marathon") == 0.0);

    const auto host = event_scores({{"AUS", "Swim", 2000, 2, 1, 10}}, {{2000, "AUS"}}, 1.2);
    CHECK(host.at("AUS", "Swim") == Approx(1.2 * 20.0).epsilon(1e-15));

    // Scores accumulate across Games.
    const auto two = event_scores({{"KEN", "Marathon", 2000, 1, 2, 10}, {"KEN", "Marathon", 2004, 1, 1, 5}}, {});
    CHECK(two.at("KEN", "Marathon") == Approx(5.0 + 5.0));

    CHECK_THROWS_AS(event_scores({{"KEN", "M", 2000, 1, 0, 10}}, {}), DomainError);
    CHECK_THROWS_AS(event_scores({{"KEN", "M", 2000, 1, 1, 0}}, {}), DomainError);
    CHECK_THROWS_AS(event_scores({{"KEN", "M", 2000, 1, 5, 4}}, {}), DomainError);
}

TEST_CASE("build_influence_graph edges", "[influence]") {
    CountryEventMatrix m;
    m.scores["A"] = {{"USA", 4.0}, {"CHN", 1.0}};
    m.scores["B"] = {{"USA", 2.0}, {"KEN", 5.0}};
    m.scores["C"] = {{"KEN", 3.0}, {"CHN", 2.0}};
    m.scores["D"] = {{"JAM", 1.0}};
    const auto g = build_influence_graph(m, 0.5);
    REQUIRE(g.size() == 5);
    CHECK(g.nodes.back() == kHubNode);
    // Hand-computed min-overlap sums.
    CHECK(g.edge_weight(0, 1) == Approx(2.0));       // A-B via USA: min(4,2)
    CHECK(g.edge_weight(0, 2) == Approx(1.0));       // A-C via CHN: min(1,2)
    CHECK(g.edge_weight(1, 2) == Approx(3.0));       // B-C via KEN: min(5,3)
    CHECK(g.edge_weight(2, 1) == Approx(3.0));
    for (std::size_t e = 0; e < 3; ++e) CHECK(g.edge_weight(e, 3) == 0.0); // D shares no country
    for (std::size_t e = 0; e < 4; ++e) {
        CHECK(g.edge_weight(4, e) == 0.5);
        CHECK(g.edge_weight(e, 4) == 0.5);
        CHECK(g.edge_weight(e, e) == 0.0);
    }
    CHECK_THROWS_AS(build_influence_graph(CountryEventMatrix{}, 1.0), DomainError);
    CHECK_THROWS_AS(build_influence_graph(m, 0.0), DomainError);
}

TEST_CASE("pagerank small cases", "[influence]") {
    WeightedDigraph one;
    one.add_node("x");
    one.add_edge(0, 0, 3.0);
    CHECK(pagerank(one).scores[0] == Approx(1.0).epsilon(1e-15));

    WeightedDigraph two;
    two.add_node("a");
    two.add_node("b");
    two.add_edge(0, 1, 2.0);
    two.add_edge(1, 0, 2.0);
    const auto pr = pagerank(two);
    CHECK(pr.scores[0] == Approx(0.5).margin(1e-12));
    CHECK(pr.scores[1] == Approx(0.5).margin(1e-12));
    const auto rank = ranking(two, pr);
    CHECK(rank[0].first == "a"); // tie: name order

    CHECK_THROWS_AS(pagerank(two, {1.0, 1e-10, 100}), DomainError);
    CHECK_THROWS_AS(pagerank(two, {0.85, 0.0, 100}), DomainError);
}

TEST_CASE("pagerank reports non-convergence with the last iterate", "[influence]") {
    Rng rng = derived_rng(31, 0);
    const auto g = synth::random_graph(rng, 30);
    try {
        pagerank(g, {0.85, 1e-15, 2});
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.last_iterate().size() == 30);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("pagerank matches dense power iteration", "[influence][property]") {
    Rng rng = derived_rng(32, 0);
    for (int k = 0; k < 20; ++k) {
        const auto g = synth::random_graph(rng, 50);
        const auto pr = pagerank(g);
        const auto want = synth::dense_pagerank(g, 0.85);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(pr.scores[i] - want[i]));
        CHECK(worst <= 1e-8);
        CHECK(std::accumulate(pr.scores.begin(), pr.scores.end(), 0.0) == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("pagerank invariants on influence graphs", "[influence][property]") {
    Rng rng = derived_rng(33, 0);
    const char* countries[] = {"USA", "CHN", "KEN", "JAM", "GBR", "FRA"};
    std::vector<EventResult> results;
    for (int e = 0; e < 12; ++e)
        for (const char* c : countries)
            if (bernoulli(rng, 0.4))
                results.push_back({c, "E" + std::to_string(e), 2000 + 4 * int(uniform_index(rng, 6)),
                                   double(uniform_index(rng, 4)), int(1 + uniform_index(rng, 8)), 10});
    const auto m = event_scores(results, {{2008, "CHN"}});
    const auto g = build_influence_graph(m, 1.0);
    const auto pr = pagerank(g);
    for (double s : pr.scores) CHECK(s > 0.0);
    CHECK(std::accumulate(pr.scores.begin(), pr.scores.end(), 0.0) == Approx(1.0).margin(1e-9));

    // Uniform scaling of every edge weight leaves scores unchanged.
    WeightedDigraph scaled = g;
    for (auto& edges : scaled.out)
        for (auto& e : edges) e.weight *= 37.5;
    const auto pr2 = pagerank(scaled);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(pr2.scores[i] == Approx(pr.scores[i]).margin(1e-12));

    const auto proj = country_projection(m, g, pr);
    double total = 0.0;
    for (const auto& [_, v] : proj) total += v;
    CHECK(total == Approx(1.0).margin(1e-12));
}
