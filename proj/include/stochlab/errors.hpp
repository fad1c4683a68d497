#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochlab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field evaluated outside its table domain, or a stencil left the domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical state went non-finite or a conservation budget was exceeded.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Time step violates a stability bound.
class StabilityError : public Error {
public:
    using Error::Error;
};

// Invalid argument combination (scheme/field mismatch, missing indices, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error("invalid '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace stochlab
