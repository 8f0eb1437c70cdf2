// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <zlib.h>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "pulse/error.hpp"
#include "pulse/wire.hpp"

// zstd and lz4 ship here as runtime libraries without development headers, so
// the stable public C ABI entry points are declared directly.
extern "C" {
size_t ZSTD_compress(void* dst, size_t dst_capacity, const void* src, size_t src_size,
                     int compression_level);
size_t ZSTD_decompress(void* dst, size_t dst_capacity, const void* src, size_t src_size);
size_t ZSTD_compressBound(size_t src_size);
unsigned ZSTD_isError(size_t code);
int LZ4_compress_default(const char* src, char* dst, int src_size, int dst_capacity);
int LZ4_decompress_safe(const char* src, char* dst, int compressed_size, int dst_capacity);
int LZ4_compressBound(int input_size);
}

namespace pulse {

enum class CodecId : std::uint32_t {
    Identity = 0,
    Lz4 = 1,
    Zstd1 = 2,
    Zstd3 = 3,
    Gzip6 = 4,
};

inline constexpr std::string_view codec_name(CodecId codec) {
    switch (codec) {
        case CodecId::Identity:
            return "identity";
        case CodecId::Lz4:
            return "lz4";
        case CodecId::Zstd1:
            return "zstd-1";
        case CodecId::Zstd3:
            return "zstd-3";
        case CodecId::Gzip6:
            return "gzip-6";
    }
    throw ArgumentError("unknown codec");
}

inline CodecId codec_from_id(std::uint32_t id) {
    if (id > static_cast<std::uint32_t>(CodecId::Gzip6)) {
        throw FormatError("unknown codec id " + std::to_string(id));
    }
    return static_cast<CodecId>(id);
}

inline CodecId codec_from_name(std::string_view name) {
    for (std::uint32_t id = 0; id <= static_cast<std::uint32_t>(CodecId::Gzip6); ++id) {
        if (name == codec_name(static_cast<CodecId>(id))) {
            return static_cast<CodecId>(id);
        }
    }
    throw ArgumentError("unknown codec name: " + std::string(name));
}

namespace detail {

// Decompressed sizes above this are treated as stream corruption rather than
// honoured, so a damaged size prefix cannot trigger an enormous allocation.
inline constexpr std::uint64_t kMaxDeclaredRawSize = 1ull << 40;

inline constexpr std::size_t kLz4MaxInput = 0x7E000000;  // LZ4_MAX_INPUT_SIZE

inline Bytes lz4_compress(std::span<const std::uint8_t> raw) {
    if (raw.size() > kLz4MaxInput) {
        throw ArgumentError("input too large for lz4 block format");
    }
    Bytes out(static_cast<std::size_t>(LZ4_compressBound(static_cast<int>(raw.size()))));
    int produced = LZ4_compress_default(reinterpret_cast<const char*>(raw.data()),
                                        reinterpret_cast<char*>(out.data()),
                                        static_cast<int>(raw.size()), static_cast<int>(out.size()));
    if (produced <= 0) {
        throw Error("lz4 compression failed");
    }
    out.resize(static_cast<std::size_t>(produced));
    return out;
}

inline Bytes zstd_compress(std::span<const std::uint8_t> raw, int level) {
    Bytes out(ZSTD_compressBound(raw.size()));
    std::size_t produced = ZSTD_compress(out.data(), out.size(), raw.data(), raw.size(), level);
    if (ZSTD_isError(produced)) {
        throw Error("zstd compression failed");
    }
    out.resize(produced);
    return out;
}

inline Bytes zlib_compress(std::span<const std::uint8_t> raw, int level) {
    uLongf produced = compressBound(static_cast<uLong>(raw.size()));
    Bytes out(static_cast<std::size_t>(produced));
    if (compress2(out.data(), &produced, raw.data(), static_cast<uLong>(raw.size()), level) !=
        Z_OK) {
        throw Error("deflate compression failed");
    }
    out.resize(static_cast<std::size_t>(produced));
    return out;
}

}  // namespace detail

// Every codec except IDENTITY wraps its stream in an envelope that leads with
// the decompressed size as u64, so decompression can allocate exactly once.
inline Bytes compress(std::span<const std::uint8_t> raw, CodecId codec) {
    if (codec == CodecId::Identity) {
        return Bytes(raw.begin(), raw.end());
    }
    ByteWriter w;
    w.u64le(raw.size());
    if (raw.empty()) {
        return w.out;
    }
    Bytes stream;
    switch (codec) {
        case CodecId::Lz4:
            stream = detail::lz4_compress(raw);
            break;
        case CodecId::Zstd1:
            stream = detail::zstd_compress(raw, 1);
            break;
        case CodecId::Zstd3:
            stream = detail::zstd_compress(raw, 3);
            break;
        case CodecId::Gzip6:
            stream = detail::zlib_compress(raw, 6);
            break;
        default:
            throw ArgumentError("unknown codec");
    }
    w.raw(std::span<const std::uint8_t>(stream));
    return w.out;
}

inline Bytes decompress(std::span<const std::uint8_t> enveloped, CodecId codec) {
    if (codec == CodecId::Identity) {
        return Bytes(enveloped.begin(), enveloped.end());
    }
    if (enveloped.size() < 8) {
        throw CorruptStreamError("codec envelope shorter than its size prefix");
    }
    ByteReader r{enveloped};
    std::uint64_t raw_size = r.u64le();
    if (raw_size > detail::kMaxDeclaredRawSize) {
        throw CorruptStreamError("declared decompressed size is implausible");
    }
    std::span<const std::uint8_t> body = enveloped.subspan(8);
    if (raw_size == 0) {
        if (!body.empty()) {
            throw CorruptStreamError("codec envelope has trailing bytes");
        }
        return {};
    }
    Bytes out(static_cast<std::size_t>(raw_size));
    switch (codec) {
        case CodecId::Lz4: {
            if (body.size() > detail::kLz4MaxInput) {
                throw CorruptStreamError("lz4 stream is corrupt");
            }
            int produced = LZ4_decompress_safe(
                reinterpret_cast<const char*>(body.data()), reinterpret_cast<char*>(out.data()),
                static_cast<int>(body.size()), static_cast<int>(out.size()));
            if (produced < 0 || static_cast<std::uint64_t>(produced) != raw_size) {
                throw CorruptStreamError("lz4 stream is corrupt");
            }
            break;
        }
        case CodecId::Zstd1:
        case CodecId::Zstd3: {
            std::size_t produced =
                ZSTD_decompress(out.data(), out.size(), body.data(), body.size());
            if (ZSTD_isError(produced) || produced != raw_size) {
                throw CorruptStreamError("zstd stream is corrupt");
            }
            break;
        }
        case CodecId::Gzip6: {
            uLongf produced = static_cast<uLongf>(raw_size);
            int rc =
                uncompress(out.data(), &produced, body.data(), static_cast<uLong>(body.size()));
            if (rc != Z_OK || produced != raw_size) {
                throw CorruptStreamError("deflate stream is corrupt");
            }
            break;
        }
        default:
            throw ArgumentError("unknown codec");
    }
    return out;
}

}  // namespace pulse
