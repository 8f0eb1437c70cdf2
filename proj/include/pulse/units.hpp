// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "pulse/error.hpp"

namespace pulse {
namespace detail {

// Splits "20.16Gbit" into the number and the unit tail.  The tail keeps its
// case; callers match it against their unit table.
inline double parse_unit_number(std::string_view text, std::string_view& unit_out,
                                std::string_view what) {
    const std::string owned(text);
    const char* begin = owned.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) {
        throw ArgumentError(std::string(what) + ": expected a number in '" + owned + "'");
    }
    std::size_t offset = static_cast<std::size_t>(end - begin);
    while (offset < owned.size() && std::isspace(static_cast<unsigned char>(owned[offset]))) {
        ++offset;
    }
    unit_out = text.substr(offset);
    if (!(value >= 0.0)) {
        throw ArgumentError(std::string(what) + ": value must be non-negative in '" + owned + "'");
    }
    return value;
}

}  // namespace detail

// "400Mbit" → 400e6.  Decimal prefixes; bare numbers are already bits/s.
inline double parse_bandwidth(std::string_view text) {
    std::string_view unit;
    const double value = detail::parse_unit_number(text, unit, "bandwidth");
    double scale = 1.0;
    if (unit.empty() || unit == "bit" || unit == "bps") {
        scale = 1.0;
    } else if (unit == "Kbit" || unit == "kbit") {
        scale = 1e3;
    } else if (unit == "Mbit" || unit == "mbit") {
        scale = 1e6;
    } else if (unit == "Gbit" || unit == "gbit") {
        scale = 1e9;
    } else if (unit == "Tbit" || unit == "tbit") {
        scale = 1e12;
    } else {
        throw ArgumentError("bandwidth: unknown unit '" + std::string(unit) +
                            "' (use bit, Kbit, Mbit, Gbit, or Tbit)");
    }
    return value * scale;
}

// "108MB" → 108e6.  Decimal prefixes: MB = 10^6 bytes, GB = 10^9 bytes.
inline double parse_bytes(std::string_view text) {
    std::string_view unit;
    const double value = detail::parse_unit_number(text, unit, "size");
    double scale = 1.0;
    if (unit.empty() || unit == "B") {
        scale = 1.0;
    } else if (unit == "KB" || unit == "kB") {
        scale = 1e3;
    } else if (unit == "MB") {
        scale = 1e6;
    } else if (unit == "GB") {
        scale = 1e9;
    } else if (unit == "TB") {
        scale = 1e12;
    } else {
        throw ArgumentError("size: unknown unit '" + std::string(unit) +
                            "' (use B, KB, MB, GB, or TB)");
    }
    return value * scale;
}

// "50s" → 50.  Bare numbers are seconds.
inline double parse_seconds(std::string_view text) {
    std::string_view unit;
    const double value = detail::parse_unit_number(text, unit, "duration");
    double scale = 1.0;
    if (unit.empty() || unit == "s") {
        scale = 1.0;
    } else if (unit == "ms") {
        scale = 1e-3;
    } else if (unit == "min") {
        scale = 60.0;
    } else if (unit == "h") {
        scale = 3600.0;
    } else {
        throw ArgumentError("duration: unknown unit '" + std::string(unit) +
                            "' (use s, ms, min, or h)");
    }
    return value * scale;
}

}  // namespace pulse
