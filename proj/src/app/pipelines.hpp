#pragma once

#include "app/artifacts.hpp"
#include "app/config.hpp"

#include <json.hpp>

#include <exception>
#include <string>
#include <vector>

namespace olymp::app {

/// Unknown subcommand or missing required configuration.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& commands();
bool is_command(const std::string& name);

/// Runs one subcommand: writes its tables and figures, then report.json and
/// manifest.json, into `out`. Returns the report.
nlohmann::ordered_json run_command(const std::string& command, const Config& config, Artifacts& out);

/// {"error": {"type", "message", ...}} for the exception currently being handled.
nlohmann::ordered_json error_json(const std::exception_ptr& e, const std::string& command);

/// Directory holding the shipped data files (regimes, scenarios): OLYMP_DATA_DIR
/// when set, else the source tree's data/ directory.
std::string data_dir();

} // namespace olymp::app
