#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvilab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Input violates an operation's precondition (bad sizes, out-of-range parameters).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Geometry that makes a quantity undefined (zero norm, coincident centroids, ...).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

}  // namespace cvilab
