#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace smplab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or grids of the operands do not match.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of the operation (e.g. eta <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration text; carries the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A well-formed input violates a documented invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string invariant, const std::string& what)
        : Error(invariant + ": " + what), invariant_(std::move(invariant)) {}
    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// Non-finite values appeared during time stepping.
class BlowUpError : public Error {
public:
    BlowUpError(std::size_t step, const std::string& what)
        : Error("blow-up at step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Least-squares regression could not be carried out reliably.
class RegressionError : public Error {
public:
    using Error::Error;
};

} // namespace smplab
