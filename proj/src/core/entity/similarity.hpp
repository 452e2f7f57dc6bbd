#pragma once

#include <string_view>

namespace olymp::entity {

/// Character-level edit distance (insert, delete, substitute; unit costs).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - dist / max(len). Empty/empty is 1.
double levenshtein_similarity(std::string_view a, std::string_view b);

double jaro(std::string_view a, std::string_view b);

/// Jaro-Winkler with prefix scale 0.1 over at most 4 leading characters.
double jaro_winkler(std::string_view a, std::string_view b);

/// Best alignment of the shorter string anywhere inside the longer one:
/// 1 - (min edit distance of shorter to any substring of longer) / len(shorter).
double partial_similarity(std::string_view a, std::string_view b);

struct SimilarityWeights {
    double levenshtein = 0.5;
    double jaro_winkler = 0.3;
    double partial = 0.2;
};

/// Weighted blend of the three component scores. Throws DomainError on empty input.
double hybrid_similarity(std::string_view a, std::string_view b, const SimilarityWeights& w = {});

} // namespace olymp::entity
