#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace somscreen {

/// Base of every error raised by the library. `kind()` is the stable
/// machine-readable tag the CLI prints in front of the message.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

/// Data whose spread is too small for an eigen-based computation.
class DegenerateData : public Error {
public:
    explicit DegenerateData(const std::string& what) : Error("degenerate-data", what) {}
};

class EmptySegmentation : public Error {
public:
    explicit EmptySegmentation(const std::string& what) : Error("empty-segmentation", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

/// Malformed text input. `line()` is 1-based; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse", line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace somscreen
