// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "pulse/checkpoint.hpp"
#include "pulse/error.hpp"
#include "pulse/wire.hpp"

namespace pulse {

inline constexpr char kContainerMagic[4] = {'P', 'U', 'L', 'C'};
inline constexpr std::uint32_t kContainerVersion = 1;

namespace detail {

inline std::uint64_t align64(std::uint64_t n) {
    return (n + 63) & ~std::uint64_t{63};
}

inline Bytes read_file_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open file: " + path.string());
    f.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(f.tellg());
    f.seekg(0);
    Bytes bytes(size);
    if (size > 0 &&
        !f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
        throw Error("failed to read file: " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot create file: " + path.string());
    if (!bytes.empty() && !f.write(reinterpret_cast<const char*>(bytes.data()),
                                   static_cast<std::streamsize>(bytes.size())))
        throw Error("failed to write file: " + path.string());
    f.flush();
    if (!f) throw Error("failed to write file: " + path.string());
}

}  // namespace detail

/// Serializes a checkpoint: magic, u32 version, u64 JSON header length, JSON
/// tensor table, then raw little-endian BF16 payload. Tensor payload offsets
/// are relative to the 64-byte-aligned payload base, each itself 64-byte
/// aligned, so tensors can be mapped directly. The writer is canonical:
/// equal checkpoints serialize to equal bytes.
inline Bytes write_checkpoint_bytes(const Checkpoint& c) {
    c.validate();

    nlohmann::json header;
    header["step"] = c.step;
    auto& table = header["tensors"] = nlohmann::json::array();
    std::vector<std::uint64_t> offsets;
    std::uint64_t offset = 0;
    for (const auto& t : c.tensors) {
        const std::uint64_t nbytes = t.numel() * 2;
        offsets.push_back(offset);
        table.push_back({{"name", t.name},
                         {"dtype", "bf16"},
                         {"shape", t.shape},
                         {"offset", offset},
                         {"nbytes", nbytes}});
        offset = detail::align64(offset + nbytes);
    }
    const std::string json = header.dump();

    ByteWriter w;
    w.raw(std::string_view{kContainerMagic, 4});
    w.u32le(kContainerVersion);
    w.u64le(json.size());
    w.raw(json);
    if (!c.tensors.empty()) {
        const std::uint64_t payload_base = detail::align64(16 + json.size());
        for (std::size_t i = 0; i < c.tensors.size(); ++i) {
            const std::uint64_t want = payload_base + offsets[i];
            while (w.out.size() < want) w.out.push_back(0);
            for (auto v : c.tensors[i].data) w.u16le(v.bits);
        }
    }
    return w.out;
}

inline Checkpoint read_checkpoint_bytes(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < 4) throw TruncationError("container shorter than magic");
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kContainerMagic))
        throw BadMagicError("not a checkpoint container (bad magic)");
    const std::uint32_t version = r.u32le();
    if (version != kContainerVersion)
        throw VersionError("unsupported container version " + std::to_string(version));
    const std::uint64_t header_len = r.u64le();
    if (header_len > r.remaining()) throw TruncationError("container header truncated");
    const auto header_bytes = r.raw(header_len);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("container header is not valid JSON: ") + e.what());
    }

    Checkpoint c;
    std::uint64_t end = 16 + header_len;  // no payload ⇒ file ends after the header
    try {
        c.step = header.at("step").get<std::uint64_t>();
        const std::uint64_t payload_base = detail::align64(16 + header_len);
        for (const auto& entry : header.at("tensors")) {
            TensorRecord t;
            t.name = entry.at("name").get<std::string>();
            if (entry.at("dtype").get<std::string>() != "bf16")
                throw FormatError("unsupported dtype for tensor " + t.name);
            t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            const auto offset = entry.at("offset").get<std::uint64_t>();
            const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
            if (offset % 64 != 0) throw FormatError("misaligned tensor payload for " + t.name);
            std::uint64_t numel = 1;
            for (auto extent : t.shape) {
                if (extent <= 0) throw FormatError("non-positive extent in tensor " + t.name);
                numel *= static_cast<std::uint64_t>(extent);
            }
            if (nbytes != numel * 2)
                throw FormatError("payload length does not match shape for tensor " + t.name);
            const std::uint64_t begin = payload_base + offset;
            if (begin + nbytes > bytes.size())
                throw TruncationError("tensor payload truncated for " + t.name);
            t.data.resize(numel);
            ByteReader pr(bytes.subspan(begin, nbytes));
            for (auto& v : t.data) v.bits = pr.u16le();
            if (begin + nbytes > end) end = begin + nbytes;
            c.tensors.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("container header schema error: ") + e.what());
    }
    if (bytes.size() != end) throw FormatError("container has trailing bytes");
    c.validate();
    return c;
}

inline void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
    detail::write_file_bytes(path, write_checkpoint_bytes(c));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
    return read_checkpoint_bytes(detail::read_file_bytes(path));
}

}  // namespace pulse
