#pragma once

#include "app/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace olymp::app {

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::string& path);

/// Output directory of one run. Every file written through here is hashed
/// into the manifest, as is every registered input.
class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    void add_input(const std::string& role, const std::string& path);
    /// Input hashed from content generated in-process (builtin tables).
    void add_builtin_input(const std::string& role, const std::string& content);

    const std::filesystem::path& dir() const { return dir_; }
    nlohmann::ordered_json manifest(const std::string& command, const Config& config) const;

private:
    struct Entry {
        std::string name;
        std::string path;
        std::string sha256;
    };
    std::filesystem::path dir_;
    std::vector<Entry> inputs_;
    std::vector<Entry> outputs_;
};

/// Line chart of one or more series against their index (or `x` when given).
std::string svg_line_chart(const std::string& title, const std::vector<std::pair<std::string, std::vector<double>>>& series,
                           const std::vector<double>& x = {});

/// Fixed-point formatting used for every CSV number.
std::string fmt(double v, int digits = 6);

} // namespace olymp::app
