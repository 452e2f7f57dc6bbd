#include "entity/similarity.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace olymp::entity {

namespace {

// Components are evaluated on a canonical (shorter, longer) ordering with a
// lexicographic tie-break so every score is symmetric in its arguments.
std::pair<std::string_view, std::string_view> ordered(std::string_view a, std::string_view b) {
    if (a.size() < b.size() || (a.size() == b.size() && a <= b)) return {a, b};
    return {b, a};
}

} // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double jaro(std::string_view a_in, std::string_view b_in) {
    const auto [a, b] = ordered(a_in, b_in);
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    const std::size_t window = std::max<std::size_t>(std::max(a.size(), b.size()) / 2, 1) - 1;
    std::vector<bool> a_hit(a.size(), false), b_hit(b.size(), false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(b.size(), i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_hit[j] && a[i] == b[j]) {
                a_hit[i] = b_hit[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    std::size_t half_transpositions = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a_hit[i]) continue;
        while (!b_hit[k]) ++k;
        if (a[i] != b[k]) ++half_transpositions;
        ++k;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(half_transpositions) / 2.0;
    return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view a_in, std::string_view b_in) {
    const auto [a, b] = ordered(a_in, b_in);
    const double j = jaro(a, b);
    std::size_t prefix = 0;
    while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

double partial_similarity(std::string_view a_in, std::string_view b_in) {
    const auto [shorter, longer] = ordered(a_in, b_in);
    if (shorter.empty()) return longer.empty() ? 1.0 : 0.0;

    // Semi-global alignment: free leading/trailing gaps in the longer string.
    std::vector<std::size_t> prev(longer.size() + 1, 0), cur(longer.size() + 1);
    for (std::size_t i = 1; i <= shorter.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= longer.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (shorter[i - 1] == longer[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    const std::size_t best = *std::min_element(prev.begin(), prev.end());
    return std::max(0.0, 1.0 - static_cast<double>(best) / static_cast<double>(shorter.size()));
}

double hybrid_similarity(std::string_view a, std::string_view b, const SimilarityWeights& w) {
    if (a.empty() || b.empty()) throw DomainError("hybrid_similarity: empty string");
    const double s = w.levenshtein * levenshtein_similarity(a, b) + w.jaro_winkler * jaro_winkler(a, b) +
                     w.partial * partial_similarity(a, b);
    return std::clamp(s, 0.0, 1.0);
}

} // namespace olymp::entity
