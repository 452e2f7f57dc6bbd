#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace olymp::app {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string measured;
    std::string threshold;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 2024;
    /// countries.csv for the determinism run; a synthetic panel when empty.
    std::string countries_path;
    /// Scratch directory for the determinism run; a temp dir when empty.
    std::filesystem::path scratch;
};

std::vector<int> all_criteria();
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// "[PASS] 3 pagerank vs dense oracle: <measured> (<threshold>) 0.41s"
std::string format_result(const CriterionResult& r);

} // namespace olymp::app
