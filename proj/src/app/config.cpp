#include "app/config.hpp"

#include "common/csv.hpp"
#include "common/error.hpp"

#include <cerrno>
#include <charconv>
#include <fstream>

namespace olymp::app {

Config Config::parse(std::istream& in, const std::string& source) {
    Config c;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = csv::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DomainError(source + ": line " + std::to_string(n) + ": expected 'key = value'");
        try {
            c.set(csv::trim(t.substr(0, eq)), csv::trim(t.substr(eq + 1)));
        } catch (const DomainError& e) {
            throw DomainError(source + ": line " + std::to_string(n) + ": " + e.what());
        }
    }
    return c;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config '" + path + "'");
    return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
    if (key.empty()) throw DomainError("empty config key");
    for (char ch : key)
        if (!((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' || ch == '-'))
            throw DomainError("bad config key '" + key + "'");
    values_[key] = value;
}

void Config::merge(const Config& overrides) {
    for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

const std::string* Config::find(const std::string& key) const {
    read_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::text(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
}

double Config::real(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
        throw DomainError("config key '" + key + "': expected a number, got '" + *v + "'");
    return out;
}

long Config::integer(const std::string& key, long fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
        throw DomainError("config key '" + key + "': expected an integer, got '" + *v + "'");
    return out;
}

std::uint64_t Config::seed() const {
    const auto* v = find("seed");
    if (!v) return 0;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
        throw DomainError("config key 'seed': expected a 64-bit unsigned integer, got '" + *v + "'");
    return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
    if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
    throw DomainError("config key '" + key + "': expected true/false, got '" + *v + "'");
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::vector<std::string> Config::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

} // namespace olymp::app
