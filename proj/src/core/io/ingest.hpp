#pragma once

#include "common/panel.hpp"
#include "common/records.hpp"
#include "entity/resolver.hpp"
#include "influence/influence.hpp"

#include <istream>
#include <string>
#include <vector>

namespace olymp::io {

inline const std::vector<std::string> kCountriesHeader{
    "noc", "year", "gold", "silver", "bronze", "total", "gdp_usd", "population", "athlete_count", "is_host"};
inline const std::vector<std::string> kEventsHeader{"noc", "year", "sport", "event", "medal_count", "rank",
                                                     "participants"};
inline const std::vector<std::string> kCoachesHeader{"noc", "sport", "coach_id", "start_year", "end_year", "score"};

/// countries.csv with GDP converted to 100 million USD and population to millions.
/// NOC codes are taken verbatim. Empty, NA or nan GDP/population are missing.
Panel read_countries(std::istream& in, const std::string& source);
Panel read_countries_file(const std::string& path);
/// Inverse of read_countries (GDP back to USD, population to persons).
std::string write_countries(const Panel& panel);

struct EventRow {
    std::string noc;
    int year = 0;
    std::string sport;
    std::string event;
    double medal_count = 0.0;
    int rank = 1;
    int participants = 1;
};

std::vector<EventRow> read_events(std::istream& in, const std::string& source);
std::vector<EventRow> read_events_file(const std::string& path);

std::vector<CoachSpell> read_coaches(std::istream& in, const std::string& source);
std::vector<CoachSpell> read_coaches_file(const std::string& path);

struct RowResolution {
    std::size_t row = 0;  ///< 1-based data row
    int year = 0;
    entity::Resolution resolution;
};

struct CountryIngest {
    Panel panel;  ///< resolved rows; unresolved rows are kept out but listed in `resolutions` and `quality`
    std::vector<RowResolution> resolutions;
    entity::QualityReport quality;
};

/// Resolves every NOC, merges rows that land on the same (noc, year) by
/// summing counts and economics, imputes GDP and population, and audits the
/// result. `known_codes` feeds the cross-file mismatch count.
CountryIngest ingest_countries(const Panel& raw, const std::vector<entity::CanonEntry>& canon,
                               const entity::RegimeTable& regimes, const entity::ResolverOptions& options = {},
                               const std::vector<std::string>* known_codes = nullptr);

/// Applies regime mapping to event and coach NOCs (by event year / start year).
void map_codes(std::vector<EventRow>& events, const entity::RegimeTable& regimes);
void map_codes(std::vector<CoachSpell>& coaches, const entity::RegimeTable& regimes);

std::vector<influence::EventResult> to_event_results(const std::vector<EventRow>& rows);

/// noc -> sport -> year -> medals summed over events.
std::map<std::string, std::map<std::string, std::map<int, double>>> sport_medals(const std::vector<EventRow>& rows);

/// Host NOC per Games year from is_host flags (first flagged row wins).
std::map<int, std::string> hosts(const Panel& panel);

} // namespace olymp::io
