#pragma once

// Straightforward reference versions of the string metrics, written without
// reference to the library implementation.

#include <algorithm>
#include <string>
#include <vector>

namespace olymp::test {

inline int oracle_levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[a.size()][b.size()];
}

inline std::pair<std::string, std::string> oracle_order(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? std::pair{a, b} : std::pair{b, a};
    return a <= b ? std::pair{a, b} : std::pair{b, a};
}

inline double oracle_jaro_winkler(const std::string& a0, const std::string& b0) {
    const auto [s1, s2] = oracle_order(a0, b0);
    const int l1 = static_cast<int>(s1.size()), l2 = static_cast<int>(s2.size());
    const int range = std::max(0, std::max(l1, l2) / 2 - 1);
    std::vector<int> f1(l1, 0), f2(l2, 0);
    int m = 0;
    for (int i = 0; i < l1; ++i)
        for (int j = std::max(0, i - range); j <= std::min(l2 - 1, i + range); ++j)
            if (!f2[j] && s1[i] == s2[j]) {
                f1[i] = f2[j] = 1;
                ++m;
                break;
            }
    if (m == 0) return 0.0;
    std::string m1, m2;
    for (int i = 0; i < l1; ++i)
        if (f1[i]) m1 += s1[i];
    for (int j = 0; j < l2; ++j)
        if (f2[j]) m2 += s2[j];
    int half = 0;
    for (std::size_t k = 0; k < m1.size(); ++k) half += m1[k] != m2[k];
    const double jaro = (double(m) / l1 + double(m) / l2 + (m - half / 2.0) / m) / 3.0;
    int prefix = 0;
    while (prefix < 4 && prefix < l1 && s1[prefix] == s2[prefix]) ++prefix;
    return jaro + prefix * 0.1 * (1.0 - jaro);
}

/// Best substring match: try every substring of the longer string.
inline double oracle_partial(const std::string& a, const std::string& b) {
    const auto [s, l] = oracle_order(a, b);
    int best = static_cast<int>(s.size());
    for (std::size_t i = 0; i <= l.size(); ++i)
        for (std::size_t len = 0; i + len <= l.size(); ++len)
            best = std::min(best, oracle_levenshtein(s, l.substr(i, len)));
    return std::max(0.0, 1.0 - double(best) / double(s.size()));
}

inline double oracle_hybrid(const std::string& a, const std::string& b) {
    const double lev = 1.0 - double(oracle_levenshtein(a, b)) / double(std::max(a.size(), b.size()));
    return 0.5 * lev + 0.3 * oracle_jaro_winkler(a, b) + 0.2 * oracle_partial(a, b);
}

} // namespace olymp::test
