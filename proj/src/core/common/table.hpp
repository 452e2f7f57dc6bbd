#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace olymp::csv {

/// A CSV file with a fixed header. Accessors throw ParseError naming the
/// source, data row and column.
struct Table {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t size() const { return rows.size(); }
    std::size_t column(std::string_view name) const;
    const std::string& text(std::size_t row, std::string_view col) const;
    double real(std::size_t row, std::string_view col) const;
    std::optional<double> optional_real(std::size_t row, std::string_view col) const;
    long integer(std::size_t row, std::string_view col) const;
    std::optional<long> optional_integer(std::size_t row, std::string_view col) const;
    bool flag(std::size_t row, std::string_view col) const;  ///< 0/1/true/false
};

/// Header must equal `expected` exactly (after trimming); every row must have
/// as many fields as the header.
Table read_table(std::istream& in, const std::vector<std::string>& expected, const std::string& source);
Table read_table_file(const std::string& path, const std::vector<std::string>& expected);

/// Quotes fields containing the separator, quotes or line breaks.
std::string join(const std::vector<std::string>& fields, char sep = ',');

} // namespace olymp::csv
