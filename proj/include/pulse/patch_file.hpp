// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "pulse/compression.hpp"
#include "pulse/container.hpp"
#include "pulse/error.hpp"
#include "pulse/index_coding.hpp"
#include "pulse/patch.hpp"
#include "pulse/wire.hpp"

namespace pulse {

inline constexpr char kPatchMagic[4] = {'P', 'U', 'L', 'P'};
inline constexpr std::uint32_t kPatchVersion = 1;

/// Serializes a patch: magic, u32 version, u64 JSON header length, JSON
/// header, then one compressed index blob and one compressed value blob per
/// tensor in header order. Index and value streams are compressed separately
/// because the value payload is near-incompressible BF16 while the index
/// stream is highly regular. The writer is canonical: equal patches
/// serialize to equal bytes.
inline Bytes write_patch_bytes(const SparsePatch& p) {
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        const TensorPatch& tp = p.tensors[i];
        if (tp.name.empty()) throw ArgumentError("tensor patch with empty name");
        if (i > 0 && !(p.tensors[i - 1].name < tp.name))
            throw ArgumentError("tensor patches must be in ascending name order");
        if (tp.shape.empty()) throw ArgumentError("tensor '" + tp.name + "' has empty shape");
        for (auto extent : tp.shape)
            if (extent <= 0)
                throw ArgumentError("tensor '" + tp.name + "' has non-positive extent");
        if (tp.indices.size() != tp.values.size())
            throw ArgumentError("tensor '" + tp.name + "' has mismatched index and value counts");
    }

    const std::vector<Bytes> index_payloads = encode_index_payloads(p);

    nlohmann::json header;
    header["anchor_step"] = p.anchor_step;
    header["base_step"] = p.base_step;
    header["target_step"] = p.target_step;
    header["target_hash"] = p.target_hash.hex();
    header["codec"] = static_cast<std::uint32_t>(p.codec);
    header["representation"] = representation_name(p.representation);
    auto& table = header["tensors"] = nlohmann::json::array();

    std::vector<Bytes> blobs;
    blobs.reserve(p.tensors.size() * 2);
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        const TensorPatch& tp = p.tensors[i];
        Bytes index_blob = compress(index_payloads[i], p.codec);
        Bytes value_blob = compress(value_payload_bytes(tp.values), p.codec);
        nlohmann::json entry = {{"name", tp.name},
                                {"shape", tp.shape},
                                {"count", tp.indices.size()},
                                {"index_nbytes", index_blob.size()},
                                {"value_nbytes", value_blob.size()}};
        if (p.representation == SparseRepresentation::CooDownscaled) {
            entry["row_bits"] = kRowDeltaBits;
            entry["col_bits"] = kColDeltaBits;
        }
        table.push_back(std::move(entry));
        blobs.push_back(std::move(index_blob));
        blobs.push_back(std::move(value_blob));
    }
    const std::string json = header.dump();

    ByteWriter w;
    w.raw(std::string_view{kPatchMagic, 4});
    w.u32le(kPatchVersion);
    w.u64le(json.size());
    w.raw(json);
    for (const Bytes& blob : blobs) w.raw(std::span<const std::uint8_t>(blob));
    return w.out;
}

inline SparsePatch read_patch_bytes(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < 4) throw TruncationError("patch shorter than magic");
    const auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kPatchMagic))
        throw BadMagicError("not a patch file (bad magic)");
    const std::uint32_t version = r.u32le();
    if (version != kPatchVersion)
        throw VersionError("unsupported patch version " + std::to_string(version));
    const std::uint64_t header_len = r.u64le();
    if (header_len > r.remaining()) throw TruncationError("patch header truncated");
    const auto header_bytes = r.raw(header_len);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("patch header is not valid JSON: ") + e.what());
    }

    SparsePatch p;
    std::vector<Bytes> index_payloads;
    try {
        p.anchor_step = header.at("anchor_step").get<std::int64_t>();
        p.base_step = header.at("base_step").get<std::int64_t>();
        p.target_step = header.at("target_step").get<std::int64_t>();
        p.target_hash = WeightsHash::from_hex(header.at("target_hash").get<std::string>());
        p.codec = codec_from_id(header.at("codec").get<std::uint32_t>());
        p.representation = representation_from_name(header.at("representation").get<std::string>());
        for (const auto& entry : header.at("tensors")) {
            TensorPatch tp;
            tp.name = entry.at("name").get<std::string>();
            tp.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            for (auto extent : tp.shape)
                if (extent <= 0) throw FormatError("non-positive extent in tensor " + tp.name);
            const auto count = entry.at("count").get<std::uint64_t>();
            const auto index_nbytes = entry.at("index_nbytes").get<std::uint64_t>();
            const auto value_nbytes = entry.at("value_nbytes").get<std::uint64_t>();
            if (p.representation == SparseRepresentation::CooDownscaled) {
                if (entry.at("row_bits").get<int>() != kRowDeltaBits ||
                    entry.at("col_bits").get<int>() != kColDeltaBits)
                    throw FormatError("unsupported delta widths for tensor " + tp.name);
            }

            if (index_nbytes > r.remaining()) throw TruncationError("index blob truncated");
            Bytes index_payload = decompress(r.raw(index_nbytes), p.codec);
            if (value_nbytes > r.remaining()) throw TruncationError("value blob truncated");
            Bytes value_payload = decompress(r.raw(value_nbytes), p.codec);
            if (value_payload.size() != count * 2)
                throw FormatError("value payload length does not match change count for tensor " +
                                  tp.name);
            tp.values = values_from_payload(value_payload);
            index_payloads.push_back(std::move(index_payload));
            p.tensors.push_back(std::move(tp));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("patch header schema error: ") + e.what());
    }
    if (r.remaining() != 0) throw FormatError("patch has trailing bytes");

    decode_index_payloads(p, index_payloads);
    return p;
}

inline void write_patch(const SparsePatch& p, const std::filesystem::path& path) {
    detail::write_file_bytes(path, write_patch_bytes(p));
}

inline SparsePatch read_patch(const std::filesystem::path& path) {
    return read_patch_bytes(detail::read_file_bytes(path));
}

}  // namespace pulse
