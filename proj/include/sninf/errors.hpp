#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sninf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Index or argument outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (bad gamma, empty clipped measure, mismatched table, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The plug-in estimator is not defined on the requested block.
class EstimatorUndefined : public Error {
public:
    using Error::Error;
};

/// A normalizer matrix is singular or too badly conditioned to invert.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition_number)
        : Error(what), condition_number_(condition_number) {}

    [[nodiscard]] double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

/// Malformed input data. Carries the 1-based line of the offending record (0 if unknown).
class IngestError : public Error {
public:
    IngestError(const std::string& what, std::size_t line) : Error(what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Critical-value table missing, malformed or incompatible with the request.
class TableError : public Error {
public:
    using Error::Error;
};

/// Too many bootstrap replicates were degenerate.
class BootstrapUnstable : public Error {
public:
    using Error::Error;
};

/// An exact algebraic identity was violated beyond tolerance.
class IdentityFailure : public Error {
public:
    using Error::Error;
};

}  // namespace sninf
