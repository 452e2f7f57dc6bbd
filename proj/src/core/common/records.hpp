#pragma once

#include <string>

namespace olymp {

/// A coach's tenure with a national federation in one sport (coaches.csv row).
struct CoachSpell {
    std::string noc;
    std::string sport;
    std::string coach_id;
    int start_year = 0;
    int end_year = 0;
    double score = 0.0;
};

/// Olympic cycle index of a Games year (1896 is cycle 0).
inline int cycle_of_year(int year) { return (year - 1896) / 4; }

} // namespace olymp
