#pragma once

#include <optional>
#include <string>
#include <vector>

namespace olymp {

/// One (country, Games year) row of the national panel.
/// GDP is in units of 100 million USD, population in millions.
struct PanelRecord {
    std::string noc;
    int year = 0;
    int gold = 0;
    int silver = 0;
    int bronze = 0;
    int total = 0;
    std::optional<double> gdp;
    std::optional<double> population;
    int athlete_count = 0;
    bool is_host = false;
};

using Panel = std::vector<PanelRecord>;

inline constexpr int kFirstGamesYear = 1896;
inline constexpr int kLastObservedYear = 2024;

} // namespace olymp
