#pragma once

#include "common/rng.hpp"
#include "entity/resolver.hpp"

#include <string>
#include <vector>

namespace olymp::synth {

struct TypoCase {
    std::string typed;
    std::string expected_code;
};

/// One random single-character edit (substitute, insert or delete, equally
/// likely; lowercase letters) applied to a uniformly drawn canonical name.
inline std::vector<TypoCase> typo_corpus(const std::vector<entity::CanonEntry>& canon, std::size_t count,
                                         std::uint64_t seed) {
    Rng rng = derived_rng(seed, 0);
    std::vector<TypoCase> out;
    while (out.size() < count) {
        const auto& entry = canon[uniform_index(rng, canon.size())];
        std::string s = entry.name;
        const std::size_t pos = uniform_index(rng, s.size());
        const char c = static_cast<char>('a' + uniform_index(rng, 26));
        switch (uniform_index(rng, 3)) {
        case 0:
            if (s[pos] == c) continue; // not a typo
            s[pos] = c;
            break;
        case 1: s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), c); break;
        default: s.erase(pos, 1); break;
        }
        out.push_back({s, entry.code});
    }
    return out;
}

} // namespace olymp::synth
