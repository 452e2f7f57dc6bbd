#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace olymp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition or input-domain violation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. row is 1-based over data rows (0 for the header).
class ParseError : public DomainError {
public:
    ParseError(std::string file, std::size_t row, std::string column, const std::string& detail)
        : DomainError(file + ": row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") +
                      ": " + detail),
          file_(std::move(file)), row_(row), column_(std::move(column)) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t row_;
    std::string column_;
};

/// Operation invoked on an object that is not in a usable state (e.g. unfitted model).
class StateError : public Error {
public:
    using Error::Error;
};

/// Iterative solver stopped without meeting its tolerance. Carries the last iterate.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> last_iterate, double residual)
        : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> last_iterate_;
    double residual_;
};

} // namespace olymp
