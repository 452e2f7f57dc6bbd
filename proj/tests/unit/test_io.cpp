#include <catch2/catch_amalgamated.hpp>

#include "common/error.hpp"
#include "entity/resolver.hpp"
#include "io/ingest.hpp"
#include "support/paths.hpp"
#include "synth/panel_generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace olymp;
using Catch::Approx;

namespace {

const std::string kHeader = "noc,year,gold,silver,bronze,total,gdp_usd,population,athlete_count,is_host\n";

Panel parse_countries(const std::string& body) {
    std::istringstream in(kHeader + body);
    return io::read_countries(in, "countries.csv");
}

template <class F>
ParseError parse_error(F&& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected ParseError");
    return ParseError("", 0, "", "");
}

} // namespace

TEST_CASE("read_countries converts units and keeps missing economics empty", "[io]") {
    const auto p = parse_countries("USA,2024,40,44,42,126,2800000000000,335000000,592,0\n"
                                   "FRA,2024,16,26,22,64,,NA,573,1\n");
    REQUIRE(p.size() == 2);
    CHECK(p[0].noc == "USA");
    CHECK(*p[0].gdp == Approx(28000.0));
    CHECK(*p[0].population == Approx(335.0));
    CHECK(p[0].total == 126);
    CHECK_FALSE(p[1].gdp.has_value());
    CHECK_FALSE(p[1].population.has_value());
    CHECK(p[1].is_host);
}

TEST_CASE("read_countries errors name file, row and column", "[io]") {
    auto e = parse_error([] { parse_countries("USA,2024,1,1,1,3,1e12,1e8,10,0\nGBR,18x6,1,0,0,1,1e12,6e7,10,0\n"); });
    CHECK(e.file() == "countries.csv");
    CHECK(e.row() == 2);
    CHECK(e.column() == "year");

    e = parse_error([] { parse_countries("USA,2024,-1,1,1,1,1e12,1e8,10,0\n"); });
    CHECK(e.column() == "gold");
    e = parse_error([] { parse_countries("USA,1700,1,1,1,3,1e12,1e8,10,0\n"); });
    CHECK(e.column() == "year");
    e = parse_error([] { parse_countries("USA,2024,1,1,1,3,1e12,1e8,10\n"); });
    CHECK(e.row() == 1);

    std::istringstream bad_header("noc,year,gold\nUSA,2024,1\n");
    CHECK_THROWS_AS(io::read_countries(bad_header, "x.csv"), ParseError);
}

TEST_CASE("write_countries round-trips", "[io]") {
    const auto panel = synth::synthetic_countries(5, 8, 2000, 2012);
    std::istringstream in(io::write_countries(panel));
    const auto back = io::read_countries(in, "round.csv");
    REQUIRE(back.size() == panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
        CHECK(back[i].noc == panel[i].noc);
        CHECK(back[i].year == panel[i].year);
        CHECK(back[i].gold == panel[i].gold);
        CHECK(std::abs(*back[i].gdp - *panel[i].gdp) <= 0.5e-8);  // whole USD
        CHECK(std::abs(*back[i].population - *panel[i].population) <= 0.5e-6);  // whole persons
    }
}

TEST_CASE("read_events and read_coaches validate rows", "[io]") {
    std::istringstream events("noc,year,sport,event,medal_count,rank,participants\n"
                              "CHN,2008,Swimming,200m Butterfly,1,1,32\nURS,1988,Gymnastics,Vault,1,2,30\n");
    auto rows = io::read_events(events, "events.csv");
    REQUIRE(rows.size() == 2);
    io::map_codes(rows, entity::RegimeTable::builtin());
    CHECK(rows[1].noc == "URS");
    rows[1].year = 1992;
    io::map_codes(rows, entity::RegimeTable::builtin());
    CHECK(rows[1].noc == "RUS");

    std::istringstream zero_rank("noc,year,sport,event,medal_count,rank,participants\nCHN,2008,Swimming,x,1,0,32\n");
    CHECK(parse_error([&] { io::read_events(zero_rank, "events.csv"); }).column() == "rank");

    std::istringstream coaches("noc,sport,coach_id,start_year,end_year,score\nGBR,Rowing,C1,2012,2008,0.5\n");
    CHECK(parse_error([&] { io::read_coaches(coaches, "coaches.csv"); }).row() == 1);
}

TEST_CASE("ingest_countries resolves, merges and reports", "[io]") {
    const auto raw = parse_countries("Untied States,2016,46,37,38,121,1.9e13,3.2e8,554,0\n"
                                     "URS,1988,55,31,46,132,2.5e12,2.86e8,480,0\n"
                                     "Xq Zzv,2016,0,0,0,0,1e9,1e6,3,0\n"
                                     "GDR,1992,1,0,0,1,1e11,1e7,10,0\n"
                                     "GER,1992,33,21,28,82,2.0e12,8.0e7,463,0\n");
    const auto ingest =
        io::ingest_countries(raw, entity::builtin_canon(), entity::RegimeTable::builtin());
    REQUIRE(ingest.resolutions.size() == 5);
    CHECK(ingest.resolutions[0].resolution.output == "USA");
    CHECK(ingest.resolutions[0].resolution.method == entity::ResolutionMethod::fuzzy);
    CHECK(ingest.resolutions[1].resolution.output == "URS");
    CHECK(ingest.resolutions[2].resolution.method == entity::ResolutionMethod::unresolved);
    CHECK(ingest.resolutions[3].resolution.output == "GER");

    REQUIRE(ingest.panel.size() == 3);  // unresolved dropped, GDR 1992 merged into GER
    const auto ger = std::find_if(ingest.panel.begin(), ingest.panel.end(), [](auto& r) { return r.noc == "GER"; });
    REQUIRE(ger != ingest.panel.end());
    CHECK(ger->gold == 34);
    CHECK(ger->total == 83);
    CHECK(*ger->gdp == Approx(21000.0));
    CHECK(ger->athlete_count == 473);
    CHECK(ingest.quality.unresolved_fraction == Approx(0.2));
}

TEST_CASE("shipped fixtures parse", "[io]") {
    const auto countries = io::read_countries_file(test::fixture_path("countries.csv"));
    CHECK(countries.size() == 216);
    CHECK(io::hosts(countries).at(2008) == "CHN");
    const auto events = io::read_events_file(test::fixture_path("events.csv"));
    const auto medals = io::sport_medals(events);
    CHECK(medals.at("CHN").at("Swimming").size() == 8);
    CHECK(io::to_event_results(events).size() == events.size());
    CHECK(io::read_coaches_file(test::fixture_path("coaches.csv")).size() == 5);
}
