#pragma once

#include <stdexcept>
#include <string>

namespace rlcnet {

/// Base for every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition (non-positive parameter, empty
/// sample, out-of-range derivative order).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Non-finite state, loss or gradient.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed text input: netlists, CSV files, checkpoints.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A bond graph whose storage elements cannot all be put in integral causality.
class CausalityError : public Error {
public:
    using Error::Error;
};

/// Source and target models do not share an architecture.
class ArchitectureMismatch : public Error {
public:
    using Error::Error;
};

/// An inverse-mode estimate left the positive domain.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace rlcnet
