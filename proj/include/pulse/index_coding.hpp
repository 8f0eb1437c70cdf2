// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pulse/error.hpp"
#include "pulse/wire.hpp"

namespace pulse {

inline std::vector<std::int64_t> delta_encode_indices(std::span<const std::int64_t> indices) {
    std::vector<std::int64_t> gaps;
    gaps.reserve(indices.size());
    std::int64_t previous = 0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0) {
            throw ArgumentError("indices must be non-negative");
        }
        if (i > 0 && indices[i] <= previous) {
            throw ArgumentError("indices must be strictly increasing");
        }
        gaps.push_back(i == 0 ? indices[i] : indices[i] - previous);
        previous = indices[i];
    }
    return gaps;
}

inline std::vector<std::int64_t> delta_decode_indices(std::span<const std::int64_t> gaps) {
    std::vector<std::int64_t> indices;
    indices.reserve(gaps.size());
    std::int64_t previous = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (i == 0) {
            if (gaps[0] < 0) {
                throw FormatError("first index gap is negative");
            }
            previous = gaps[0];
        } else {
            if (gaps[i] <= 0) {
                throw FormatError("non-positive index gap after the first element");
            }
            previous += gaps[i];
        }
        indices.push_back(previous);
    }
    return indices;
}

struct CooCoordinates {
    std::vector<std::int64_t> rows;
    std::vector<std::int64_t> cols;

    bool operator==(const CooCoordinates&) const = default;
};

// Row gaps travel as u8 and column entries as u16; the marker values 0xFF and
// 0xFFFF are reserved as escapes, each followed by the true value as u32.
inline constexpr std::uint8_t kRowEscape = 0xFF;
inline constexpr std::uint16_t kColEscape = 0xFFFF;
inline constexpr int kRowDeltaBits = 8;
inline constexpr int kColDeltaBits = 16;

namespace detail {

inline void write_row_entry(ByteWriter& w, std::int64_t gap) {
    if (gap > 0xFFFFFFFFll) {
        throw DimensionError("row gap exceeds 32 bits");
    }
    if (gap >= kRowEscape) {
        w.u8(kRowEscape);
        w.u32le(static_cast<std::uint32_t>(gap));
    } else {
        w.u8(static_cast<std::uint8_t>(gap));
    }
}

inline void write_col_entry(ByteWriter& w, std::int64_t value) {
    if (value > 0xFFFFFFFFll) {
        throw DimensionError("column entry exceeds 32 bits");
    }
    if (value >= kColEscape) {
        w.u16le(kColEscape);
        w.u32le(static_cast<std::uint32_t>(value));
    } else {
        w.u16le(static_cast<std::uint16_t>(value));
    }
}

inline std::int64_t read_row_entry(ByteReader& r) {
    std::uint8_t narrow = r.u8();
    return narrow == kRowEscape ? static_cast<std::int64_t>(r.u32le()) : narrow;
}

inline std::int64_t read_col_entry(ByteReader& r) {
    std::uint16_t narrow = r.u16le();
    return narrow == kColEscape ? static_cast<std::int64_t>(r.u32le()) : narrow;
}

}  // namespace detail

// Coordinates must arrive sorted by (row, col) with no duplicates. The payload
// is the row stream followed by the column stream: row entries are gaps (the
// first is the absolute row), column entries restart as absolute values on
// each new row and continue as within-row gaps otherwise.
inline Bytes downscale_coo(std::span<const std::int64_t> rows, std::span<const std::int64_t> cols) {
    if (rows.size() != cols.size()) {
        throw ArgumentError("row and column lists differ in length");
    }
    ByteWriter w;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || cols[i] < 0) {
            throw ArgumentError("coordinates must be non-negative");
        }
        if (i > 0 &&
            (rows[i] < rows[i - 1] || (rows[i] == rows[i - 1] && cols[i] <= cols[i - 1]))) {
            throw ArgumentError("coordinates must be sorted row-major without duplicates");
        }
        detail::write_row_entry(w, i == 0 ? rows[i] : rows[i] - rows[i - 1]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool new_row = i == 0 || rows[i] != rows[i - 1];
        detail::write_col_entry(w, new_row ? cols[i] : cols[i] - cols[i - 1]);
    }
    return w.out;
}

inline CooCoordinates upscale_coo(std::span<const std::uint8_t> payload, std::size_t count) {
    ByteReader r{payload};
    CooCoordinates out;
    out.rows.reserve(count);
    out.cols.reserve(count);
    std::int64_t row = 0;
    for (std::size_t i = 0; i < count; ++i) {
        row = i == 0 ? detail::read_row_entry(r) : row + detail::read_row_entry(r);
        out.rows.push_back(row);
    }
    std::int64_t col = 0;
    for (std::size_t i = 0; i < count; ++i) {
        bool new_row = i == 0 || out.rows[i] != out.rows[i - 1];
        std::int64_t entry = detail::read_col_entry(r);
        if (new_row) {
            col = entry;
        } else {
            if (entry <= 0) {
                throw CorruptStreamError("non-positive column gap within a row");
            }
            col += entry;
        }
        out.cols.push_back(col);
    }
    if (r.remaining() != 0) {
        throw CorruptStreamError("downscaled payload has trailing bytes");
    }
    return out;
}

}  // namespace pulse
