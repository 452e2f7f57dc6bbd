#pragma once

#include <vector>

namespace olymp::validation {

struct ShapiroWilk {
    double w = 1.0;
    double p = 1.0;
};

/// Shapiro-Wilk normality test (Royston's approximation, 3 <= n <= 5000).
/// Throws DomainError on a constant sample or an out-of-range size.
ShapiroWilk shapiro_wilk(std::vector<double> x);

} // namespace olymp::validation
