#pragma once

#include <stdexcept>
#include <string>

namespace gwrkit {

/// Failure category. The CLI maps each to a distinct exit code.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed or inconsistent configuration (unknown keys, bad subsets).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Input data that fails validation: unreadable files, missing columns,
/// degenerate denominators, empty results after filtering.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// A numerical procedure could not produce a defined result.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Rank-deficient design. `column` is the index of a column found to be
/// linearly dependent on the others.
class CollinearityError : public NumericalError {
public:
    CollinearityError(const std::string& what, std::size_t column)
        : NumericalError(what), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

} // namespace gwrkit
