// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "pulse/checkpoint.hpp"
#include "pulse/compression.hpp"
#include "pulse/patch.hpp"
#include "pulse/patch_file.hpp"
#include "pulse/wire.hpp"

namespace pulse {

struct CompressionReport {
    bool empty_patch = false;
    std::uint64_t changed = 0;
    std::uint64_t compressed_bytes = 0;  // serialized patch, header included
    std::uint64_t raw_coo_bytes = 0;     // 4-byte index + 2-byte value per change
    std::uint64_t dense_bytes = 0;       // 2 bytes per checkpoint element
    double sparse_ratio = 0.0;           // raw_coo_bytes / compressed_bytes
    double full_ratio = 0.0;             // dense_bytes / compressed_bytes
    double encode_bps = 0.0;             // raw payload bytes over serialization wall time
    double decode_bps = 0.0;             // raw payload bytes over deserialization wall time
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

inline CompressionReport measure_compression(const Checkpoint& current, const Checkpoint& previous,
                                             SparseRepresentation repr, CodecId codec) {
    SparsePatch patch = encode(current, previous, repr, codec);

    CompressionReport report;
    report.changed = static_cast<std::uint64_t>(patch.total_changes());
    report.dense_bytes = current.total_elements() * 2;
    report.raw_coo_bytes = report.changed * (4 + 2);

    std::uint64_t raw_payload_bytes = 0;
    for (const Bytes& payload : encode_index_payloads(patch)) raw_payload_bytes += payload.size();
    raw_payload_bytes += report.changed * 2;

    auto t0 = std::chrono::steady_clock::now();
    Bytes wire = write_patch_bytes(patch);
    double encode_seconds = detail::seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    SparsePatch back = read_patch_bytes(wire);
    double decode_seconds = detail::seconds_since(t1);
    (void)back;

    report.compressed_bytes = wire.size();
    if (patch.tensors.empty()) {
        report.empty_patch = true;
    } else {
        report.sparse_ratio = static_cast<double>(report.raw_coo_bytes) /
                              static_cast<double>(report.compressed_bytes);
        report.full_ratio =
            static_cast<double>(report.dense_bytes) / static_cast<double>(report.compressed_bytes);
    }
    if (encode_seconds > 0.0)
        report.encode_bps = static_cast<double>(raw_payload_bytes) / encode_seconds;
    if (decode_seconds > 0.0)
        report.decode_bps = static_cast<double>(raw_payload_bytes) / decode_seconds;
    return report;
}

/// Compressed index-stream sizes for the three encoding stages of the same
/// change set: absolute 32-bit indices, gap-encoded 32-bit, and gap-encoded
/// with 8/16-bit downscaling.
struct IndexPipelineSizes {
    std::uint64_t raw_int32 = 0;
    std::uint64_t delta_int32 = 0;
    std::uint64_t downscaled = 0;
};

inline IndexPipelineSizes measure_index_pipeline(const SparsePatch& patch, CodecId codec) {
    IndexPipelineSizes sizes;

    for (const TensorPatch& tp : patch.tensors) {
        detail::require_int32_indexable(tp);
        ByteWriter w;
        w.out.reserve(tp.indices.size() * 4);
        for (std::int64_t index : tp.indices) w.u32le(static_cast<std::uint32_t>(index));
        sizes.raw_int32 += compress(w.out, codec).size();
    }

    SparsePatch staged = patch;
    staged.representation = SparseRepresentation::CooInt32;
    for (const Bytes& payload : encode_index_payloads(staged))
        sizes.delta_int32 += compress(payload, codec).size();

    staged.representation = SparseRepresentation::CooDownscaled;
    for (const Bytes& payload : encode_index_payloads(staged))
        sizes.downscaled += compress(payload, codec).size();

    return sizes;
}

}  // namespace pulse
