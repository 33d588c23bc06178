#pragma once

#include <stdexcept>
#include <string>

namespace womops {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a model function (e.g. a fee for
/// which the member-count function is undefined).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A shipment policy violates its structural invariants (negative phase,
/// zero cycle length).
class InvalidPolicy : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class InvalidGrid : public Error {
public:
    using Error::Error;
};

class UnsupportedSignal : public Error {
public:
    using Error::Error;
};

/// A closed form was evaluated outside the regime in which it is valid.
class RegimeViolation : public Error {
public:
    using Error::Error;
};

class InfeasibleProblem : public Error {
public:
    using Error::Error;
};

/// Configuration problem. `path()` names the offending field, e.g.
/// "market.K".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message)
        : Error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// An experiment needs a parameter value that the configured grids do not
/// contain.
class ConfigMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace womops
