#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace utr {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the 1-based line number (0 when not
/// line-oriented) and the offending field name when one is known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(std::size_t line, const std::string& field, const std::string& what) {
        std::string msg;
        if (line > 0) msg += "line " + std::to_string(line) + ": ";
        if (!field.empty()) msg += "field '" + field + "': ";
        return msg + what;
    }

    std::size_t line_;
    std::string field_;
};

/// Grammar violation in a rendered answer string, positioned by byte offset.
class GrammarError : public Error {
public:
    GrammarError(std::size_t offset, const std::string& what)
        : Error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace utr
