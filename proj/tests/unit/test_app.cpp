#include <catch2/catch_amalgamated.hpp>

#include "app/artifacts.hpp"
#include "app/config.hpp"
#include "app/pipelines.hpp"
#include "common/error.hpp"
#include "support/paths.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace olymp;
using namespace olymp::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("olymp-test-app-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("config parsing and typed access", "[app]") {
    std::istringstream in("# run settings\nseed = 42\n\nzicp.eta=0.5\n  stgcn.epochs = 10  \nflag = yes\nname = a = b\n");
    auto c = Config::parse(in, "run.cfg");
    CHECK(c.seed() == 42);
    CHECK(c.real("zicp.eta", 0) == 0.5);
    CHECK(c.integer("stgcn.epochs", 0) == 10);
    CHECK(c.flag("flag", false));
    CHECK(c.text("name") == "a = b");
    CHECK(c.real("missing", 1.5) == 1.5);
    CHECK(c.unused().empty());
    CHECK(c.canonical() == "flag = yes\nname = a = b\nseed = 42\nstgcn.epochs = 10\nzicp.eta = 0.5\n");

    Config o;
    o.set("zicp.eta", "0.25");
    o.set("extra", "1");
    c.merge(o);
    CHECK(c.real("zicp.eta", 0) == 0.25);
    CHECK(c.unused() == std::vector<std::string>{"extra"});

    CHECK_THROWS_AS(c.integer("zicp.eta", 0), DomainError);
    CHECK_THROWS_AS(c.set("Bad Key", "1"), DomainError);
    c.set("seed", "-3");
    CHECK_THROWS_AS(c.seed(), DomainError);
    std::istringstream bad("seed 4\n");
    CHECK_THROWS_WITH(Config::parse(bad, "run.cfg"), Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("sha256 and number formatting", "[app]") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(fmt(-0.0) == "0.000000");
    CHECK(fmt(-1e-9, 3) == "0.000");
    CHECK(fmt(2.5, 2) == "2.50");
    CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("svg chart is well formed", "[app]") {
    const auto svg = svg_line_chart("Loss & <curve>", {{"a", {3, 2, 1}}, {"b", {1, 1, 1}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("Loss &amp; &lt;curve&gt;") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg_line_chart("empty", {}).find("</svg>") != std::string::npos);
}

TEST_CASE("resolve writes tables, report and manifest", "[app]") {
    const auto dir = scratch("resolve");
    Config c;
    c.set("input.countries", test::fixture_path("countries_small.csv"));
    Artifacts out(dir);
    const auto report = run_command("resolve", c, out);
    CHECK(report["result"]["methods"]["fuzzy"] == 1);
    for (const char* f : {"resolutions.csv", "resolved_countries.csv", "quality_flags.csv", "report.json", "manifest.json"})
        CHECK(fs::exists(dir / f));
    CHECK(slurp(dir / "resolutions.csv").find("Untied States,2016,USA") != std::string::npos);

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "resolve");
    CHECK(manifest["config_hash"] == sha256_hex(c.canonical()));
    CHECK(manifest["inputs"][0]["sha256"] == file_sha256(test::fixture_path("countries_small.csv")));
    bool found = false;
    for (const auto& o : manifest["outputs"])
        if (o["file"] == "report.json") {
            found = true;
            CHECK(o["sha256"] == sha256_hex(slurp(dir / "report.json")));
        }
    CHECK(found);
    fs::remove_all(dir);
}

TEST_CASE("commands reject unknown names and missing inputs", "[app]") {
    CHECK(commands().size() == 10);
    CHECK(is_command("fit-zicp"));
    CHECK_FALSE(is_command("fit"));
    const auto dir = scratch("errors");
    Artifacts out(dir);
    Config c;
    CHECK_THROWS_AS(run_command("fit", c, out), UsageError);
    CHECK_THROWS_AS(run_command("weights", c, out), UsageError);
    c.set("input.countries", (dir / "absent.csv").string());
    CHECK_THROWS_AS(run_command("weights", c, out), DomainError);
    fs::remove_all(dir);
}

TEST_CASE("error_json carries parse location", "[app]") {
    const auto j = error_json(std::make_exception_ptr(ParseError("countries.csv", 3, "year", "not an integer")), "weights");
    CHECK(j["error"]["type"] == "parse_error");
    CHECK(j["error"]["row"] == 3);
    CHECK(j["error"]["column"] == "year");
    CHECK(j["error"]["command"] == "weights");
    CHECK(error_json(std::make_exception_ptr(UsageError("x")), "c")["error"]["type"] == "usage_error");
    CHECK(error_json(std::make_exception_ptr(std::runtime_error("x")), "c")["error"]["type"] == "internal_error");
}

TEST_CASE("module commands run on the fixtures", "[app]") {
    Config c;
    c.set("input.countries", test::fixture_path("countries_small.csv"));
    c.set("input.events", test::fixture_path("events.csv"));
    c.set("input.coaches", test::fixture_path("coaches.csv"));
    c.set("weights.bootstrap", "100");
    c.set("coach.permutations", "100");
    const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
        {"weights", {"weights.csv"}},
        {"influence", {"event_ranking.csv", "country_influence.csv"}},
        {"fit-zicp", {"zicp_coefficients.csv", "zicp_objective.csv", "zicp_objective.svg", "changepoints.csv"}},
        {"first-medals", {"first_medals.csv"}},
        {"coach-effect", {"ddd.csv", "coach_cases.csv"}},
        {"host-sim", {"impact.csv", "impact_detail.csv"}},
        {"optimize", {"allocation.csv", "allocation_objective.svg"}}};
    for (const auto& [command, files] : expected) {
        INFO(command);
        const auto dir = scratch(command);
        Artifacts out(dir);
        const auto report = run_command(command, c, out);
        CHECK(report["command"] == command);
        for (const auto& f : files) CHECK(fs::exists(dir / f));
        fs::remove_all(dir);
    }
}

TEST_CASE("first-medals lists only countries without medals", "[app]") {
    const auto dir = scratch("first");
    Config c;
    c.set("input.countries", test::fixture_path("countries_small.csv"));
    Artifacts out(dir);
    const auto report = run_command("first-medals", c, out);
    std::vector<std::string> nocs;
    for (const auto& r : report["result"]["forecast"]) {
        nocs.push_back(r["noc"]);
        CHECK(r["probability"].get<double>() >= 0.0);
        CHECK(r["probability"].get<double>() <= 1.0);
    }
    std::sort(nocs.begin(), nocs.end());
    CHECK(nocs == std::vector<std::string>{"BHU", "LAO", "NEP"});
    fs::remove_all(dir);
}

TEST_CASE("coach-effect recovers the planted fixture jump", "[app]") {
    const auto dir = scratch("coach");
    Config c;
    c.set("input.events", test::fixture_path("events.csv"));
    c.set("input.coaches", test::fixture_path("coaches.csv"));
    c.set("coach.individual", "2.15");
    c.set("coach.synergy", "3.42");
    c.set("coach.legacy", "1.28");
    Artifacts out(dir);
    const auto r = run_command("coach-effect", c, out)["result"];
    CHECK(r["focal"]["coach_id"] == "C-SWM-01");
    CHECK(r["ddd"]["beta5"].get<double>() > 2.0 * r["ddd"]["se"].get<double>());
    CHECK(r["composite_effect"]["value"].get<double>() == Catch::Approx(5.184));
    c.set("coach.focal", "nobody");
    CHECK_THROWS_AS(run_command("coach-effect", c, out), DomainError);
    fs::remove_all(dir);
}
