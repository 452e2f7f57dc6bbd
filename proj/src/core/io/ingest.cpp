#include "io/ingest.hpp"

#include "common/error.hpp"
#include "common/table.hpp"
#include "power/power_weights.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace olymp::io {

namespace {

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return in;
}

std::string file_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

int count(const csv::Table& t, std::size_t r, const char* col) {
    const long v = t.integer(r, col);
    if (v < 0) throw ParseError(t.source, r + 1, col, "must be non-negative");
    return static_cast<int>(v);
}

int year(const csv::Table& t, std::size_t r, const char* col) {
    const long v = t.integer(r, col);
    if (v < 1800 || v > 2100) throw ParseError(t.source, r + 1, col, "year out of range");
    return static_cast<int>(v);
}

std::string code(const csv::Table& t, std::size_t r, const char* col) {
    const auto& s = t.text(r, col);
    if (s.empty()) throw ParseError(t.source, r + 1, col, "empty value");
    return s;
}

} // namespace

Panel read_countries(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, kCountriesHeader, source);
    Panel p;
    for (std::size_t r = 0; r < t.size(); ++r) {
        PanelRecord rec;
        rec.noc = code(t, r, "noc");
        rec.year = year(t, r, "year");
        rec.gold = count(t, r, "gold");
        rec.silver = count(t, r, "silver");
        rec.bronze = count(t, r, "bronze");
        rec.total = count(t, r, "total");
        if (auto g = t.optional_real(r, "gdp_usd")) rec.gdp = *g / 1e8;
        if (auto pop = t.optional_real(r, "population")) rec.population = *pop / 1e6;
        rec.athlete_count = count(t, r, "athlete_count");
        rec.is_host = t.flag(r, "is_host");
        p.push_back(std::move(rec));
    }
    return p;
}

Panel read_countries_file(const std::string& path) {
    auto in = open(path);
    return read_countries(in, file_name(path));
}

std::string write_countries(const Panel& panel) {
    auto num = [](const std::optional<double>& v, double unit) {
        if (!v) return std::string();
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.0f", *v * unit);
        return std::string(buf);
    };
    std::string out = csv::join(kCountriesHeader) + "\n";
    for (const auto& r : panel)
        out += csv::join({r.noc, std::to_string(r.year), std::to_string(r.gold), std::to_string(r.silver),
                          std::to_string(r.bronze), std::to_string(r.total), num(r.gdp, 1e8),
                          num(r.population, 1e6), std::to_string(r.athlete_count), r.is_host ? "1" : "0"}) +
               "\n";
    return out;
}

std::vector<EventRow> read_events(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, kEventsHeader, source);
    std::vector<EventRow> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        EventRow e;
        e.noc = code(t, r, "noc");
        e.year = year(t, r, "year");
        e.sport = code(t, r, "sport");
        e.event = code(t, r, "event");
        e.medal_count = t.real(r, "medal_count");
        if (e.medal_count < 0) throw ParseError(t.source, r + 1, "medal_count", "must be non-negative");
        e.rank = count(t, r, "rank");
        e.participants = count(t, r, "participants");
        if (e.rank < 1) throw ParseError(t.source, r + 1, "rank", "must be at least 1");
        if (e.participants < 1) throw ParseError(t.source, r + 1, "participants", "must be at least 1");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<EventRow> read_events_file(const std::string& path) {
    auto in = open(path);
    return read_events(in, file_name(path));
}

std::vector<CoachSpell> read_coaches(std::istream& in, const std::string& source) {
    const auto t = csv::read_table(in, kCoachesHeader, source);
    std::vector<CoachSpell> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        CoachSpell s;
        s.noc = code(t, r, "noc");
        s.sport = code(t, r, "sport");
        s.coach_id = code(t, r, "coach_id");
        s.start_year = year(t, r, "start_year");
        s.end_year = year(t, r, "end_year");
        if (s.end_year < s.start_year) throw ParseError(t.source, r + 1, "end_year", "before start_year");
        s.score = t.real(r, "score");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CoachSpell> read_coaches_file(const std::string& path) {
    auto in = open(path);
    return read_coaches(in, file_name(path));
}

CountryIngest ingest_countries(const Panel& raw, const std::vector<entity::CanonEntry>& canon,
                               const entity::RegimeTable& regimes, const entity::ResolverOptions& options,
                               const std::vector<std::string>* known_codes) {
    CountryIngest out;
    Panel resolved;
    std::map<std::pair<std::string, int>, std::size_t> slot;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& r = raw[i];
        auto res = entity::resolve(r.noc, r.year, canon, regimes, options);
        PanelRecord rec = r;
        rec.noc = res.output;
        resolved.push_back(rec);
        const bool ok = res.method != entity::ResolutionMethod::unresolved;
        out.resolutions.push_back({i + 1, r.year, std::move(res)});
        if (!ok) continue;
        auto [it, fresh] = slot.try_emplace({rec.noc, rec.year}, out.panel.size());
        if (fresh) {
            out.panel.push_back(rec);
            continue;
        }
        auto& m = out.panel[it->second];
        m.gold += rec.gold;
        m.silver += rec.silver;
        m.bronze += rec.bronze;
        m.total += rec.total;
        m.athlete_count += rec.athlete_count;
        m.is_host = m.is_host || rec.is_host;
        if (m.gdp && rec.gdp) *m.gdp += *rec.gdp;
        else if (rec.gdp) m.gdp = rec.gdp;
        if (m.population && rec.population) *m.population += *rec.population;
        else if (rec.population) m.population = rec.population;
    }
    if (!out.panel.empty()) power::impute_panel(out.panel);
    entity::ValidationContext ctx;
    if (known_codes) ctx.known_codes = *known_codes;
    ctx.imputed = &out.panel;
    out.quality = entity::validate_dataset(resolved, ctx);
    return out;
}

void map_codes(std::vector<EventRow>& events, const entity::RegimeTable& regimes) {
    for (auto& e : events) e.noc = regimes.map_entity(e.noc, e.year);
}

void map_codes(std::vector<CoachSpell>& coaches, const entity::RegimeTable& regimes) {
    for (auto& c : coaches) c.noc = regimes.map_entity(c.noc, c.start_year);
}

std::vector<influence::EventResult> to_event_results(const std::vector<EventRow>& rows) {
    std::vector<influence::EventResult> out;
    for (const auto& r : rows) out.push_back({r.noc, r.event, r.year, r.medal_count, r.rank, r.participants});
    return out;
}

std::map<std::string, std::map<std::string, std::map<int, double>>> sport_medals(const std::vector<EventRow>& rows) {
    std::map<std::string, std::map<std::string, std::map<int, double>>> out;
    for (const auto& r : rows) out[r.noc][r.sport][r.year] += r.medal_count;
    return out;
}

std::map<int, std::string> hosts(const Panel& panel) {
    std::map<int, std::string> out;
    for (const auto& r : panel)
        if (r.is_host) out.try_emplace(r.year, r.noc);
    return out;
}

} // namespace olymp::io
