#pragma once

// Field accessors for line-delimited JSON records that raise ParseError with
// the line number and field name instead of nlohmann's generic messages.

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "utr/error.hpp"

namespace utr::json_util {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Json parse_object(const std::string& text, std::size_t line) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(line, "", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "", "record is not a JSON object");
    return j;
}

inline const Json& require(const Json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, key, "missing");
    return *it;
}

inline std::string get_string(const Json& j, const char* key, std::size_t line) {
    const Json& v = require(j, key, line);
    if (!v.is_string()) throw ParseError(line, key, "expected string");
    return v.get<std::string>();
}

inline std::string get_string_or(const Json& j, const char* key, std::size_t line, std::string fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) throw ParseError(line, key, "expected string");
    return it->get<std::string>();
}

inline std::int64_t get_int(const Json& j, const char* key, std::size_t line) {
    const Json& v = require(j, key, line);
    if (!v.is_number_integer()) throw ParseError(line, key, "expected integer");
    return v.get<std::int64_t>();
}

inline double as_number(const Json& v, const char* key, std::size_t line) {
    if (!v.is_number()) throw ParseError(line, key, "expected number");
    return v.get<double>();
}

inline double get_number(const Json& j, const char* key, std::size_t line) {
    return as_number(require(j, key, line), key, line);
}

/// Calls `fn(text, line)` for every non-blank line of `in`.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(text, line);
    }
}

}  // namespace utr::json_util
