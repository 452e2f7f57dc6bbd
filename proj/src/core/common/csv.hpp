#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace olymp::csv {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_line(std::string_view line);

/// Reads the next non-empty line, stripping a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

std::string trim(std::string_view s);

} // namespace olymp::csv
