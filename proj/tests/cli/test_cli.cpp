#include <catch2/catch_amalgamated.hpp>

#include "support/paths.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("olymp-test-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Run cli(const std::string& args) {
    static const auto dir = scratch("streams");
    const char* exe = std::getenv("OLYMP_CLI");
    REQUIRE(exe);
    const std::string cmd = std::string(exe) + " " + args + " >" + (dir / "out").string() + " 2>" + (dir / "err").string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "out");
    r.err = slurp(dir / "err");
    return r;
}

std::string fixture(const std::string& f) { return olymp::test::fixture_path(f); }

} // namespace

TEST_CASE("usage errors exit 2", "[cli]") {
    auto r = cli("");
    CHECK(r.code == 2);
    CHECK(r.err.find("Subcommands:") != std::string::npos);
    CHECK(r.err.find("fit-zicp") != std::string::npos);

    r = cli("forecast");
    CHECK(r.code == 2);
    r = cli("weights --no-such-flag 1");
    CHECK(r.code == 2);

    const auto dir = scratch("usage");
    r = cli("weights -o " + (dir / "o").string());
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"]["type"] == "usage_error");
    r = cli("weights --set novalue -o " + (dir / "o").string());
    CHECK(r.code == 2);

    CHECK(cli("--help").code == 0);
    CHECK(cli("--version").code == 0);
}

TEST_CASE("resolve maps historical codes by year", "[cli]") {
    const auto dir = scratch("resolve");
    std::ofstream(dir / "countries.csv") << "noc,year,gold,silver,bronze,total,gdp_usd,population,athlete_count,is_host\n"
                                            "URS,1988,55,31,46,132,2500000000000,286000000,480,0\n"
                                            "URS,1992,45,38,29,112,1500000000000,148000000,475,0\n";
    const auto r = cli("resolve --countries " + (dir / "countries.csv").string() + " -o " + (dir / "o").string());
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["command"] == "resolve");
    const auto table = slurp(dir / "o" / "resolutions.csv");
    CHECK(table.find("URS,1988,URS") != std::string::npos);
    CHECK(table.find("URS,1992,RUS") != std::string::npos);
    CHECK(slurp(dir / "o" / "resolved_countries.csv").find("RUS,1992,45") != std::string::npos);
}

TEST_CASE("malformed input exits 1 with a located parse error", "[cli]") {
    const auto dir = scratch("parse");
    std::ofstream(dir / "countries.csv") << "noc,year,gold,silver,bronze,total,gdp_usd,population,athlete_count,is_host\n"
                                            "USA,2024,40,44,42,126,2800000000000,335000000,592,0\n"
                                            "GRE,18x6,10,18,19,47,1000000000,2000000,100,1\n";
    const auto r = cli("weights --countries " + (dir / "countries.csv").string() + " -o " + (dir / "o").string());
    CHECK(r.code == 1);
    const auto err = nlohmann::json::parse(r.err)["error"];
    CHECK(err["type"] == "parse_error");
    CHECK(err["command"] == "weights");
    CHECK(err["row"] == 2);
    CHECK(err["column"] == "year");
    CHECK(err["message"].get<std::string>().find("18x6") != std::string::npos);

    const auto missing = cli("weights --countries " + (dir / "absent.csv").string() + " -o " + (dir / "o").string());
    CHECK(missing.code == 1);
    CHECK(nlohmann::json::parse(missing.err)["error"]["type"] == "domain_error");
}

TEST_CASE("flags override the config file", "[cli]") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.cfg") << "# weights run\nseed = 1\nweights.lambda = 0.1\nweights.bootstrap = 100\n";
    const auto r = cli("weights -c " + (dir / "run.cfg").string() + " --countries " + fixture("countries.csv") +
                       " --set weights.lambda=0.2 --lambda 0.07 --seed 9 -o " + (dir / "o").string());
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["seed"] == "9");
    CHECK(report["result"]["lambda"] == 0.07);
    CHECK(report["result"]["bootstrap"]["replicates"] == 100);
    const auto manifest = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(manifest["config"]["weights.lambda"] == "0.07");
    CHECK(manifest["config"]["seed"] == "9");

    const auto bad = cli("weights -c " + (dir / "run.cfg").string() + " --countries " + fixture("countries.csv") +
                         " --lambda abc -o " + (dir / "o").string());
    CHECK(bad.code == 1);
}

TEST_CASE("same seed gives byte-identical predict outputs", "[cli]") {
    const auto dir = scratch("determinism");
    const std::string args = "predict --countries " + fixture("countries.csv") +
                             " --seed 17 --epochs 20 --hidden 8 --replicas 5 -o ";
    REQUIRE(cli(args + (dir / "a").string()).code == 0);
    REQUIRE(cli(args + (dir / "b").string()).code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        ++files;
        INFO(e.path().filename());
        CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    }
    CHECK(files == 11);
    const auto header = slurp(dir / "a" / "forecast.csv").substr(0, 60);
    CHECK(header.rfind("Rank,Country,Gold Pred,95% CI,Silver Pred", 0) == 0);
    CHECK(slurp(dir / "a" / "model_0.ckpt").rfind("olymp-stgcn 1\n", 0) == 0);

    REQUIRE(cli("predict --countries " + fixture("countries.csv") + " --seed 18 --epochs 20 --hidden 8 -o " +
                (dir / "c").string())
                .code == 0);
    CHECK(slurp(dir / "a" / "model_0.ckpt") != slurp(dir / "c" / "model_0.ckpt"));
    CHECK(cli("predict --countries " + fixture("countries.csv") + " --replicas 3 -o " + (dir / "d").string()).code == 1);
}

TEST_CASE("validate prints a line per criterion", "[cli]") {
    const auto dir = scratch("validate");
    const auto r = cli("validate --criteria 3,7 -o " + (dir / "o").string());
    CHECK(r.code == 0);
    CHECK(r.err.find("[PASS] 3 ") != std::string::npos);
    CHECK(r.err.find("[PASS] 7 ") != std::string::npos);
    CHECK(nlohmann::json::parse(r.out)["result"]["passed"] == 2);
    CHECK(slurp(dir / "o" / "acceptance.csv").rfind("criterion,title,pass,measured,threshold\n", 0) == 0);
    CHECK(cli("validate --criteria 11 -o " + (dir / "o").string()).code == 1);
}
