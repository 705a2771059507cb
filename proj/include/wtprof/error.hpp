#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wtprof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was not met by the caller.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (bad window parameters, empty distributions, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// A ratio over an empty set was requested.
class UndefinedRatio : public DataError {
public:
    using DataError::DataError;
};

/// Malformed log line. Carries the 1-based line number and the offending column.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, std::string field, const std::string& detail)
        : DataError("line " + std::to_string(line) + ", field " + field + ": " + detail),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// The dual solver failed (infeasible box, no convergence).
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what, double kkt_gap = 0.0)
        : Error(what), kkt_gap_(kkt_gap) {}

    double kkt_gap() const noexcept { return kkt_gap_; }

private:
    double kkt_gap_;
};

}  // namespace wtprof
