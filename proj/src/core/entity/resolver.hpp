#pragma once

#include "common/panel.hpp"
#include "entity/similarity.hpp"

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace olymp::entity {

inline constexpr std::string_view kUnknown = "UNK";
inline constexpr std::string_view kUnknownTeam = "UNK-TEAM";

struct RegimeMapping {
    std::string historical_name;
    std::string successor_code;
    std::optional<int> transition_year; ///< empty: always mapped
};

/// Immutable historical-regime knowledge base. Chains (A -> B -> C) are
/// collapsed at construction so lookups are idempotent.
class RegimeTable {
public:
    RegimeTable() = default;
    explicit RegimeTable(std::vector<RegimeMapping> mappings);

    /// CSV with header `historical_name,successor_code,transition_year`.
    static RegimeTable from_csv(std::istream& in);
    static RegimeTable from_csv_file(const std::string& path);
    /// Table compiled into the library (same content as data/regimes.csv).
    static RegimeTable builtin();

    /// Successor code when `year` is past the transition (or no transition
    /// year is recorded); otherwise the name itself. Unknown names pass through.
    std::string map_entity(std::string_view name, int year) const;

    bool contains(std::string_view name) const;
    const std::vector<RegimeMapping>& mappings() const noexcept { return mappings_; }

private:
    std::vector<RegimeMapping> mappings_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct CleanOptions {
    std::vector<std::string> club_keywords{"Club", "Verein", "Society"};
};

/// Drops non-ASCII bytes and trailing "-<digits>" team suffixes, trims
/// whitespace, and maps club-type names to UNK-TEAM. Empty results become UNK.
std::string clean_name(std::string_view raw, const CleanOptions& options = {});

struct CanonEntry {
    std::string code;
    std::string name;
};

std::vector<CanonEntry> load_canon_csv(std::istream& in);
std::vector<CanonEntry> load_canon_file(const std::string& path);
/// List compiled into the library (same content as data/noc_names.csv).
std::vector<CanonEntry> builtin_canon();

enum class ResolutionMethod { exact, mapped, fuzzy, unresolved };

std::string_view to_string(ResolutionMethod m);

struct Resolution {
    std::string input;
    std::string output;
    double score = 0.0;
    ResolutionMethod method = ResolutionMethod::unresolved;
};

struct ResolverOptions {
    double threshold = 0.85;
    SimilarityWeights weights{};
    CleanOptions clean{};
};

/// clean_name -> exact/mapped lookup -> fuzzy best match over canonical
/// names. Fuzzy ties break on the lexicographically smaller code.
Resolution resolve(std::string_view raw, int year, const std::vector<CanonEntry>& canon,
                   const RegimeTable& regimes, const ResolverOptions& options = {});

struct QualityFlag {
    std::size_t row = 0;
    std::string noc;
    int year = 0;
    std::string reason;
};

struct QualityReport {
    double missing_rate_before = 0.0;
    double missing_rate_after = 0.0;
    std::size_t code_mismatch_count = 0;
    std::size_t negative_value_count = 0;
    std::size_t year_range_violations = 0;
    double unresolved_fraction = 0.0;
    std::vector<QualityFlag> flagged;
};

struct ValidationContext {
    /// NOC codes seen in other input files; rows whose code is absent here count as mismatches.
    std::optional<std::vector<std::string>> known_codes;
    /// Panel after imputation, for missing_rate_after.
    const Panel* imputed = nullptr;
};

/// Quality audit. Missing rates are the fraction of rows lacking GDP or population.
/// Nothing is dropped; offending rows are listed in `flagged`.
QualityReport validate_dataset(const Panel& panel, const ValidationContext& context = {});

} // namespace olymp::entity
