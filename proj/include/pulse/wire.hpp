// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "pulse/error.hpp"

namespace pulse {

using Bytes = std::vector<std::uint8_t>;

/// Appends little-endian scalars and raw bytes to a growing buffer.
struct ByteWriter {
    Bytes out;

    void u8(std::uint8_t v) { out.push_back(v); }

    void u16le(std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }

    void u32le(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64le(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void raw(std::span<const std::uint8_t> bytes) {
        out.insert(out.end(), bytes.begin(), bytes.end());
    }

    void raw(std::string_view s) {
        out.insert(out.end(), reinterpret_cast<const std::uint8_t*>(s.data()),
                   reinterpret_cast<const std::uint8_t*>(s.data()) + s.size());
    }

    void pad_to(std::size_t alignment) {
        while (out.size() % alignment != 0) out.push_back(0);
    }
};

/// Consumes little-endian scalars and raw bytes; throws TruncationError on underrun.
struct ByteReader {
    std::span<const std::uint8_t> in;
    std::size_t pos = 0;

    explicit ByteReader(std::span<const std::uint8_t> data) : in(data) {}

    std::size_t remaining() const { return in.size() - pos; }

    void require(std::size_t n) const {
        if (remaining() < n) throw TruncationError("unexpected end of data");
    }

    std::uint8_t u8() {
        require(1);
        return in[pos++];
    }

    std::uint16_t u16le() {
        require(2);
        std::uint16_t v =
            static_cast<std::uint16_t>(in[pos]) | static_cast<std::uint16_t>(in[pos + 1]) << 8;
        pos += 2;
        return v;
    }

    std::uint32_t u32le() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }

    std::uint64_t u64le() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }

    std::span<const std::uint8_t> raw(std::size_t n) {
        require(n);
        auto s = in.subspan(pos, n);
        pos += n;
        return s;
    }

    void skip(std::size_t n) {
        require(n);
        pos += n;
    }
};

}  // namespace pulse
