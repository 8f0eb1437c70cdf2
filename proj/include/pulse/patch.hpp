// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulse/bf16.hpp"
#include "pulse/checkpoint.hpp"
#include "pulse/compression.hpp"
#include "pulse/error.hpp"
#include "pulse/index_coding.hpp"
#include "pulse/sha256.hpp"
#include "pulse/wire.hpp"

namespace pulse {

enum class SparseRepresentation : std::uint32_t {
    CooDownscaled = 0,
    CooInt32 = 1,
    FlatInt32 = 2,
};

inline constexpr std::string_view representation_name(SparseRepresentation repr) {
    switch (repr) {
        case SparseRepresentation::CooDownscaled:
            return "COO_DOWNSCALED";
        case SparseRepresentation::CooInt32:
            return "COO_INT32";
        case SparseRepresentation::FlatInt32:
            return "FLAT_INT32";
    }
    throw ArgumentError("unknown representation");
}

inline SparseRepresentation representation_from_name(std::string_view name) {
    if (name == "COO_DOWNSCALED") return SparseRepresentation::CooDownscaled;
    if (name == "COO_INT32") return SparseRepresentation::CooInt32;
    if (name == "FLAT_INT32") return SparseRepresentation::FlatInt32;
    throw FormatError("unknown representation name: " + std::string(name));
}

struct TensorPatch {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<std::int64_t> indices;
    std::vector<Bf16> values;

    bool operator==(const TensorPatch&) const = default;
};

struct SparsePatch {
    std::int64_t base_step = 0;
    std::int64_t target_step = 0;
    std::int64_t anchor_step = 0;
    SparseRepresentation representation = SparseRepresentation::CooDownscaled;
    CodecId codec = CodecId::Zstd1;
    WeightsHash target_hash;
    std::vector<TensorPatch> tensors;

    bool operator==(const SparsePatch&) const = default;

    std::int64_t total_changes() const {
        std::int64_t n = 0;
        for (const TensorPatch& tp : tensors) n += static_cast<std::int64_t>(tp.indices.size());
        return n;
    }
};

inline std::int64_t tensor_numel(std::span<const std::int64_t> shape) {
    std::int64_t n = 1;
    for (std::int64_t extent : shape) n *= extent;
    return n;
}

inline Bytes value_payload_bytes(std::span<const Bf16> values) {
    ByteWriter w;
    w.out.reserve(values.size() * 2);
    for (Bf16 v : values) w.u16le(v.bits);
    return w.out;
}

inline std::vector<Bf16> values_from_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() % 2 != 0) {
        throw FormatError("value payload length is odd");
    }
    std::vector<Bf16> values(payload.size() / 2);
    ByteReader r{payload};
    for (Bf16& v : values) v = Bf16::from_bits(r.u16le());
    return values;
}

namespace detail {

inline constexpr std::int64_t kInt32IndexLimit = std::int64_t{1} << 31;

inline void require_int32_indexable(const TensorPatch& tp) {
    if (tensor_numel(tp.shape) >= kInt32IndexLimit) {
        throw DimensionError("tensor '" + tp.name + "' is too large for 32-bit indices");
    }
}

// The downscaled form views a tensor as (numel / last extent) rows by (last
// extent) columns; rank-1 tensors become a single row.
inline std::int64_t downscale_cols_extent(const TensorPatch& tp) {
    return tp.shape.back();
}

}  // namespace detail

// Raw (pre-compression) index payloads for every tensor of the patch, in
// patch order. Whole-patch scope because FLAT_INT32 threads one gap stream
// across tensor boundaries.
inline std::vector<Bytes> encode_index_payloads(const SparsePatch& patch) {
    std::vector<Bytes> payloads;
    payloads.reserve(patch.tensors.size());
    switch (patch.representation) {
        case SparseRepresentation::CooInt32: {
            for (const TensorPatch& tp : patch.tensors) {
                detail::require_int32_indexable(tp);
                auto gaps = delta_encode_indices(tp.indices);
                ByteWriter w;
                w.out.reserve(gaps.size() * 4);
                for (std::int64_t gap : gaps) w.u32le(static_cast<std::uint32_t>(gap));
                payloads.push_back(std::move(w.out));
            }
            break;
        }
        case SparseRepresentation::FlatInt32: {
            std::int64_t base = 0;
            std::int64_t previous_global = 0;
            bool any_emitted = false;
            for (const TensorPatch& tp : patch.tensors) {
                detail::require_int32_indexable(tp);
                ByteWriter w;
                w.out.reserve(tp.indices.size() * 4);
                for (std::int64_t index : tp.indices) {
                    std::int64_t global = base + index;
                    std::int64_t entry = any_emitted ? global - previous_global : global;
                    if (entry < 0 || (any_emitted && entry == 0)) {
                        throw ArgumentError("indices must be strictly increasing");
                    }
                    if (entry > 0xFFFFFFFFll) {
                        throw DimensionError("index gap exceeds 32 bits");
                    }
                    w.u32le(static_cast<std::uint32_t>(entry));
                    previous_global = global;
                    any_emitted = true;
                }
                base += tensor_numel(tp.shape);
                payloads.push_back(std::move(w.out));
            }
            break;
        }
        case SparseRepresentation::CooDownscaled: {
            for (const TensorPatch& tp : patch.tensors) {
                std::int64_t cols_extent = detail::downscale_cols_extent(tp);
                std::vector<std::int64_t> rows;
                std::vector<std::int64_t> cols;
                rows.reserve(tp.indices.size());
                cols.reserve(tp.indices.size());
                for (std::int64_t index : tp.indices) {
                    rows.push_back(index / cols_extent);
                    cols.push_back(index % cols_extent);
                }
                payloads.push_back(downscale_coo(rows, cols));
            }
            break;
        }
    }
    return payloads;
}

// Fills tensors[i].indices from payloads[i]; each tensor's change count must
// already be present as tensors[i].values.size().
inline void decode_index_payloads(SparsePatch& patch, std::span<const Bytes> payloads) {
    if (payloads.size() != patch.tensors.size()) {
        throw ArgumentError("payload count does not match tensor count");
    }
    std::int64_t flat_base = 0;
    std::int64_t previous_global = 0;
    bool any_decoded = false;
    for (std::size_t t = 0; t < patch.tensors.size(); ++t) {
        TensorPatch& tp = patch.tensors[t];
        std::int64_t numel = tensor_numel(tp.shape);
        std::size_t count = tp.values.size();
        tp.indices.clear();
        tp.indices.reserve(count);
        switch (patch.representation) {
            case SparseRepresentation::CooInt32: {
                detail::require_int32_indexable(tp);
                ByteReader r{payloads[t]};
                std::int64_t index = 0;
                for (std::size_t i = 0; i < count; ++i) {
                    std::int64_t entry = r.u32le();
                    if (i == 0) {
                        index = entry;
                    } else {
                        if (entry == 0) {
                            throw CorruptStreamError("zero index gap in tensor '" + tp.name + "'");
                        }
                        index += entry;
                    }
                    if (index >= numel) {
                        throw CorruptStreamError("index out of range in tensor '" + tp.name + "'");
                    }
                    tp.indices.push_back(index);
                }
                if (r.remaining() != 0) {
                    throw CorruptStreamError("index payload has trailing bytes");
                }
                break;
            }
            case SparseRepresentation::FlatInt32: {
                detail::require_int32_indexable(tp);
                ByteReader r{payloads[t]};
                for (std::size_t i = 0; i < count; ++i) {
                    std::int64_t entry = r.u32le();
                    std::int64_t global;
                    if (!any_decoded) {
                        global = entry;
                    } else {
                        if (entry == 0) {
                            throw CorruptStreamError("zero index gap in tensor '" + tp.name + "'");
                        }
                        global = previous_global + entry;
                    }
                    std::int64_t local = global - flat_base;
                    if (local < 0 || local >= numel) {
                        throw CorruptStreamError("index out of range in tensor '" + tp.name + "'");
                    }
                    tp.indices.push_back(local);
                    previous_global = global;
                    any_decoded = true;
                }
                if (r.remaining() != 0) {
                    throw CorruptStreamError("index payload has trailing bytes");
                }
                break;
            }
            case SparseRepresentation::CooDownscaled: {
                std::int64_t cols_extent = detail::downscale_cols_extent(tp);
                CooCoordinates coords = upscale_coo(payloads[t], count);
                for (std::size_t i = 0; i < count; ++i) {
                    if (coords.cols[i] >= cols_extent) {
                        throw CorruptStreamError("column index out of range in tensor '" + tp.name +
                                                 "'");
                    }
                    std::int64_t flat = coords.rows[i] * cols_extent + coords.cols[i];
                    if (flat >= numel) {
                        throw CorruptStreamError("index out of range in tensor '" + tp.name + "'");
                    }
                    tp.indices.push_back(flat);
                }
                break;
            }
        }
        flat_base += numel;
    }
}

inline SparsePatch encode(const Checkpoint& current, const Checkpoint& previous,
                          SparseRepresentation repr = SparseRepresentation::CooDownscaled,
                          CodecId codec = CodecId::Zstd1) {
    current.validate();
    previous.validate();

    std::vector<std::size_t> current_order = sorted_tensor_order(current);
    std::vector<std::size_t> previous_order = sorted_tensor_order(previous);
    if (current_order.size() != previous_order.size()) {
        throw TensorSetError("checkpoints have different tensor counts");
    }

    SparsePatch patch;
    patch.base_step = previous.step;
    patch.target_step = current.step;
    patch.anchor_step = previous.step;
    patch.representation = repr;
    patch.codec = codec;
    patch.target_hash = hash_weights(current);

    for (std::size_t k = 0; k < current_order.size(); ++k) {
        const TensorRecord& cur = current.tensors[current_order[k]];
        const TensorRecord& prev = previous.tensors[previous_order[k]];
        if (cur.name != prev.name) {
            throw TensorSetError("tensor sets differ: '" + cur.name + "' vs '" + prev.name + "'");
        }
        if (cur.shape != prev.shape) {
            throw ShapeMismatchError("tensor '" + cur.name + "' changed shape between checkpoints");
        }
        TensorPatch tp;
        tp.name = cur.name;
        tp.shape = cur.shape;
        for (std::size_t i = 0; i < cur.data.size(); ++i) {
            if (cur.data[i] != prev.data[i]) {
                tp.indices.push_back(static_cast<std::int64_t>(i));
                tp.values.push_back(cur.data[i]);
            }
        }
        if (!tp.indices.empty()) {
            patch.tensors.push_back(std::move(tp));
        }
    }
    return patch;
}

inline Checkpoint decode(const Checkpoint& previous, const SparsePatch& patch,
                         bool verify_hash = true) {
    Checkpoint out = previous;
    out.step = patch.target_step;
    for (const TensorPatch& tp : patch.tensors) {
        TensorRecord* target = out.find(tp.name);
        if (target == nullptr) {
            throw TensorSetError("patch references unknown tensor '" + tp.name + "'");
        }
        if (target->shape != tp.shape) {
            throw ShapeMismatchError("tensor '" + tp.name +
                                     "' shape differs between patch and checkpoint");
        }
        if (tp.values.size() != tp.indices.size()) {
            throw ArgumentError("tensor '" + tp.name + "' has mismatched index and value counts");
        }
        std::int64_t numel = target->numel();
        std::int64_t last = -1;
        for (std::size_t i = 0; i < tp.indices.size(); ++i) {
            std::int64_t index = tp.indices[i];
            if (index <= last) {
                throw IndexRangeError("tensor '" + tp.name +
                                      "' indices are not strictly increasing");
            }
            if (index >= numel) {
                throw IndexRangeError("tensor '" + tp.name + "' index " + std::to_string(index) +
                                      " out of range");
            }
            target->data[static_cast<std::size_t>(index)] = tp.values[i];
            last = index;
        }
    }
    if (verify_hash) {
        WeightsHash actual = hash_weights(out);
        if (!(actual == patch.target_hash)) {
            throw HashMismatchError(patch.target_hash.hex(), actual.hex());
        }
    }
    return out;
}

}  // namespace pulse
