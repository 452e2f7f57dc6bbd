#include "entity/resolver.hpp"

#include "common/csv.hpp"
#include "common/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace olymp::entity {

namespace {

constexpr int kMinMappingYear = 1800;
constexpr int kMaxMappingYear = 2100;

bool is_noc_code(std::string_view s) {
    return s.size() == 3 && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_word(std::string_view text, std::string_view word) {
    const std::string t = lower(text), w = lower(word);
    if (w.empty()) return false;
    for (std::size_t pos = t.find(w); pos != std::string::npos; pos = t.find(w, pos + 1)) {
        const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(t[pos - 1]));
        const std::size_t end = pos + w.size();
        const bool right = end == t.size() || !std::isalnum(static_cast<unsigned char>(t[end]));
        if (left && right) return true;
    }
    return false;
}

} // namespace

RegimeTable::RegimeTable(std::vector<RegimeMapping> mappings) : mappings_(std::move(mappings)) {
    for (std::size_t i = 0; i < mappings_.size(); ++i) {
        const auto& m = mappings_[i];
        if (csv::trim(m.historical_name).empty())
            throw DomainError("regime table row " + std::to_string(i + 1) + ": empty historical_name");
        if (!is_noc_code(m.successor_code))
            throw DomainError("regime table row " + std::to_string(i + 1) + ": successor_code '" + m.successor_code +
                              "' is not a 3-letter uppercase code");
        if (m.transition_year && (*m.transition_year < kFirstGamesYear || *m.transition_year > kMaxMappingYear))
            throw DomainError("regime table row " + std::to_string(i + 1) + ": transition_year out of [1896, 2100]");
        if (!index_.emplace(m.historical_name, i).second)
            throw DomainError("regime table: duplicate historical_name '" + m.historical_name + "'");
    }
    // Collapse successor chains to their final code.
    for (auto& m : mappings_) {
        std::set<std::string> seen{m.historical_name};
        for (auto it = index_.find(m.successor_code); it != index_.end(); it = index_.find(m.successor_code)) {
            if (!seen.insert(it->first).second) break;
            m.successor_code = mappings_[it->second].successor_code;
        }
    }
}

RegimeTable RegimeTable::from_csv(std::istream& in) {
    std::string line;
    if (!csv::next_line(in, line)) throw DomainError("regime table: empty input");
    const auto header = csv::split_line(line);
    if (header != std::vector<std::string>{"historical_name", "successor_code", "transition_year"})
        throw DomainError("regime table: expected header historical_name,successor_code,transition_year");
    std::vector<RegimeMapping> rows;
    std::size_t row = 1;
    while (csv::next_line(in, line)) {
        ++row;
        const auto f = csv::split_line(line);
        if (f.size() != 3) throw DomainError("regime table row " + std::to_string(row) + ": expected 3 fields");
        RegimeMapping m{csv::trim(f[0]), csv::trim(f[1]), std::nullopt};
        const std::string year = csv::trim(f[2]);
        if (!year.empty()) {
            std::size_t used = 0;
            int y = 0;
            try {
                y = std::stoi(year, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != year.size())
                throw DomainError("regime table row " + std::to_string(row) + ": bad transition_year '" + year + "'");
            m.transition_year = y;
        }
        rows.push_back(std::move(m));
    }
    return RegimeTable(std::move(rows));
}

RegimeTable RegimeTable::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open regime table '" + path + "'");
    return from_csv(in);
}

RegimeTable RegimeTable::builtin() {
    static const char* const kTable =
#include "entity/regimes_builtin.inc"
        ;
    std::istringstream in(kTable);
    return from_csv(in);
}

std::string RegimeTable::map_entity(std::string_view name, int year) const {
    const std::string key = csv::trim(name);
    if (key.empty()) throw DomainError("map_entity: empty name");
    if (year < kMinMappingYear || year > kMaxMappingYear)
        throw DomainError("map_entity: year " + std::to_string(year) + " outside [1800, 2100]");
    const auto it = index_.find(key);
    if (it == index_.end()) return key;
    const RegimeMapping& m = mappings_[it->second];
    if (!m.transition_year || year > *m.transition_year) return m.successor_code;
    return key;
}

bool RegimeTable::contains(std::string_view name) const { return index_.find(csv::trim(name)) != index_.end(); }

std::string clean_name(std::string_view raw, const CleanOptions& options) {
    std::string s;
    s.reserve(raw.size());
    for (const char c : raw)
        if (static_cast<unsigned char>(c) < 0x80) s.push_back(c);
    s = csv::trim(s);

    // Trailing "-<digits>" team suffix.
    std::size_t end = s.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(s[end - 1]))) --end;
    if (end < s.size() && end > 0 && s[end - 1] == '-') s = csv::trim(s.substr(0, end - 1));

    for (const auto& kw : options.club_keywords)
        if (contains_word(s, kw)) return std::string(kUnknownTeam);
    if (s.empty()) return std::string(kUnknown);
    return s;
}

std::vector<CanonEntry> load_canon_csv(std::istream& in) {
    std::string line;
    if (!csv::next_line(in, line) || csv::split_line(line) != std::vector<std::string>{"code", "name"})
        throw DomainError("canon list: expected header code,name");
    std::vector<CanonEntry> out;
    while (csv::next_line(in, line)) {
        const auto f = csv::split_line(line);
        if (f.size() != 2 || !is_noc_code(csv::trim(f[0])))
            throw DomainError("canon list: malformed row '" + line + "'");
        out.push_back({csv::trim(f[0]), csv::trim(f[1])});
    }
    return out;
}

std::vector<CanonEntry> builtin_canon() {
    static const char* const kList =
#include "entity/canon_builtin.inc"
        ;
    std::istringstream in(kList);
    return load_canon_csv(in);
}

std::vector<CanonEntry> load_canon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open canon list '" + path + "'");
    return load_canon_csv(in);
}

std::string_view to_string(ResolutionMethod m) {
    switch (m) {
    case ResolutionMethod::exact: return "exact";
    case ResolutionMethod::mapped: return "mapped";
    case ResolutionMethod::fuzzy: return "fuzzy";
    case ResolutionMethod::unresolved: return "unresolved";
    }
    return "unresolved";
}

Resolution resolve(std::string_view raw, int year, const std::vector<CanonEntry>& canon, const RegimeTable& regimes,
                   const ResolverOptions& options) {
    if (!(options.threshold > 0.0 && options.threshold <= 1.0))
        throw DomainError("resolve: threshold must lie in (0, 1]");
    if (canon.empty()) throw DomainError("resolve: canonical list is empty");

    Resolution r;
    r.input = std::string(raw);
    const std::string cleaned = clean_name(raw, options.clean);
    if (cleaned == kUnknownTeam || cleaned == kUnknown) {
        r.output = cleaned;
        return r;
    }

    const std::string key = lower(cleaned);
    for (const auto& c : canon) {
        if (key == lower(c.code) || key == lower(c.name)) {
            r.output = c.code;
            r.score = 1.0;
            r.method = ResolutionMethod::exact;
            return r;
        }
    }
    if (regimes.contains(cleaned)) {
        r.output = regimes.map_entity(cleaned, year);
        r.score = 1.0;
        r.method = ResolutionMethod::mapped;
        return r;
    }

    const CanonEntry* best = nullptr;
    double best_score = -1.0;
    for (const auto& c : canon) {
        const double s = hybrid_similarity(key, lower(c.name), options.weights);
        if (s > best_score || (s == best_score && best && c.code < best->code)) {
            best_score = s;
            best = &c;
        }
    }
    r.score = std::max(0.0, best_score);
    if (best && best_score >= options.threshold) {
        r.output = best->code;
        r.method = ResolutionMethod::fuzzy;
    } else {
        r.output = std::string(kUnknown);
    }
    return r;
}

QualityReport validate_dataset(const Panel& panel, const ValidationContext& context) {
    QualityReport q;
    auto flag = [&](std::size_t i, const std::string& reason) {
        q.flagged.push_back({i, panel[i].noc, panel[i].year, reason});
    };

    std::set<std::string, std::less<>> known;
    if (context.known_codes) known.insert(context.known_codes->begin(), context.known_codes->end());

    std::size_t missing = 0, unresolved = 0;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        const auto& r = panel[i];
        if (!r.gdp || !r.population) ++missing;
        if (!r.gdp) {
            flag(i, "missing gdp");
        } else if (*r.gdp < 0.0) {
            ++q.negative_value_count;
            flag(i, "negative gdp");
        }
        if (!r.population) {
            flag(i, "missing population");
        } else if (*r.population < 0.0) {
            ++q.negative_value_count;
            flag(i, "negative population");
        }
        if (r.year < kFirstGamesYear || r.year > kLastObservedYear) {
            ++q.year_range_violations;
            flag(i, "year outside 1896-2024");
        }
        if (r.noc == kUnknown || r.noc == kUnknownTeam) {
            ++unresolved;
            flag(i, "unresolved entity");
        } else if (context.known_codes && !known.contains(r.noc)) {
            ++q.code_mismatch_count;
            flag(i, "code not present in other inputs");
        }
    }
    if (!panel.empty()) {
        q.missing_rate_before = static_cast<double>(missing) / static_cast<double>(panel.size());
        q.unresolved_fraction = static_cast<double>(unresolved) / static_cast<double>(panel.size());
    }
    if (context.imputed && !context.imputed->empty()) {
        std::size_t after = 0;
        for (const auto& r : *context.imputed) after += (!r.gdp || !r.population) ? 1 : 0;
        q.missing_rate_after = static_cast<double>(after) / static_cast<double>(context.imputed->size());
    }
    return q;
}

} // namespace olymp::entity
