// Minimal CSV reading helpers for the fixed-header formats used here.
// UTF-8, `,` separator, `.` decimal point, `#` starts a comment line.
#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tipping/common.hpp"

namespace tipping::csv {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.emplace_back(trim(line.substr(pos)));
            break;
        }
        out.emplace_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view field, long line_no, const char* what) {
    auto t = trim(field);
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw parse_error(errc::malformed_row, line_no,
                          std::string("expected a number for ") + what + ", got '" +
                              std::string(t) + "'");
    return v;
}

inline long long parse_int(std::string_view field, long line_no, const char* what) {
    auto t = trim(field);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw parse_error(errc::malformed_row, line_no,
                          std::string("expected an integer for ") + what + ", got '" +
                              std::string(t) + "'");
    return v;
}

// One physical line of input with its 1-based line number.
struct row {
    long line_no = 0;
    std::vector<std::string> fields;
};

// Reads a headered CSV stream. Blank lines and `#` comments are skipped;
// comment lines are collected verbatim (metadata like `# n_listeners=35`
// lives there). The header must match `expected_header` byte for byte.
struct table {
    std::vector<row> rows;
    std::vector<std::string> comments;
};

inline table read_table(std::istream& in, std::string_view expected_header) {
    table out;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            out.comments.emplace_back(t);
            continue;
        }
        if (!header_seen) {
            if (t != expected_header)
                throw parse_error(errc::malformed_row, line_no,
                                  "expected header '" + std::string(expected_header) +
                                      "', got '" + std::string(t) + "'");
            header_seen = true;
            continue;
        }
        out.rows.push_back(row{line_no, split_fields(t)});
    }
    if (!header_seen)
        throw parse_error(errc::malformed_row, line_no,
                          "missing header '" + std::string(expected_header) + "'");
    return out;
}

// `# key=value` comment lookup.
inline std::optional<std::string> comment_value(const std::vector<std::string>& comments,
                                                std::string_view key) {
    for (const auto& c : comments) {
        std::string_view v = c;
        v.remove_prefix(1);  // '#'
        v = trim(v);
        auto eq = v.find('=');
        if (eq == std::string_view::npos) continue;
        if (trim(v.substr(0, eq)) == key) return std::string(trim(v.substr(eq + 1)));
    }
    return std::nullopt;
}

}  // namespace tipping::csv
