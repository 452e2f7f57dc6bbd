#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace olymp::app {

/// Flat key-value run configuration with dotted keys ("zicp.eta = 0.33").
/// Lines starting with '#' and blank lines are ignored.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source);
    static Config parse_file(const std::string& path);

    /// Keys are lowercase [a-z0-9_.-]; DomainError otherwise.
    void set(const std::string& key, const std::string& value);
    /// Values from `overrides` replace ours.
    void merge(const Config& overrides);

    bool has(const std::string& key) const;
    std::string text(const std::string& key, const std::string& fallback = "") const;
    double real(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    std::uint64_t seed() const;  ///< key "seed", default 0
    bool flag(const std::string& key, bool fallback) const;

    /// Sorted "key = value" lines; hashed into the manifest.
    std::string canonical() const;
    const std::map<std::string, std::string>& values() const { return values_; }
    /// Keys set but never read.
    std::vector<std::string> unused() const;

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

} // namespace olymp::app
