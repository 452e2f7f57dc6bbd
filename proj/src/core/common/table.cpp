#include "common/table.hpp"

#include "common/csv.hpp"
#include "common/error.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace olymp::csv {

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParseError(source, 0, std::string(name), "no such column");
}

const std::string& Table::text(std::size_t row, std::string_view col) const {
    return rows.at(row)[column(col)];
}

double Table::real(std::size_t row, std::string_view col) const {
    const auto v = optional_real(row, col);
    if (!v) throw ParseError(source, row + 1, std::string(col), "missing value");
    return *v;
}

std::optional<double> Table::optional_real(std::size_t row, std::string_view col) const {
    const std::string& s = text(row, col);
    if (s.empty() || s == "NA" || s == "nan" || s == "NaN") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(source, row + 1, std::string(col), "cannot parse '" + s + "' as a number");
    return v;
}

long Table::integer(std::size_t row, std::string_view col) const {
    const auto v = optional_integer(row, col);
    if (!v) throw ParseError(source, row + 1, std::string(col), "missing value");
    return *v;
}

std::optional<long> Table::optional_integer(std::size_t row, std::string_view col) const {
    const std::string& s = text(row, col);
    if (s.empty() || s == "NA") return std::nullopt;
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(source, row + 1, std::string(col), "cannot parse '" + s + "' as an integer");
    return v;
}

bool Table::flag(std::size_t row, std::string_view col) const {
    const std::string& s = text(row, col);
    if (s == "1" || s == "true" || s == "TRUE") return true;
    if (s == "0" || s == "false" || s == "FALSE" || s.empty()) return false;
    throw ParseError(source, row + 1, std::string(col), "expected 0 or 1, got '" + s + "'");
}

Table read_table(std::istream& in, const std::vector<std::string>& expected, const std::string& source) {
    Table t;
    t.source = source;
    std::string line;
    if (!next_line(in, line)) throw ParseError(source, 0, "", "empty file");
    for (auto& f : split_line(line)) t.header.push_back(trim(f));
    if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);
    if (t.header != expected)
        throw ParseError(source, 0, "", "unexpected header '" + join(t.header) + "', expected '" + join(expected) + "'");
    while (next_line(in, line)) {
        auto fields = split_line(line);
        if (fields.size() != t.header.size())
            throw ParseError(source, t.rows.size() + 1, "",
                             "expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        for (auto& f : fields) f = trim(f);
        t.rows.push_back(std::move(fields));
    }
    return t;
}

Table read_table_file(const std::string& path, const std::vector<std::string>& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    return read_table(in, expected, std::filesystem::path(path).filename().string());
}

std::string join(const std::vector<std::string>& fields, char sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(sep);
        const auto& f = fields[i];
        if (f.find_first_of(std::string{sep, '"', '\n', '\r'}) == std::string::npos) {
            out += f;
            continue;
        }
        out.push_back('"');
        for (char c : f) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    }
    return out;
}

} // namespace olymp::csv
