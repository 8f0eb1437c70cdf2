// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pulse/bf16.hpp"
#include "pulse/error.hpp"

namespace pulse {

/// One named BF16 tensor with row-major data.
struct TensorRecord {
    std::string name;
    std::vector<std::int64_t> shape;  // positive extents
    std::vector<Bf16> data;

    std::uint64_t numel() const {
        std::uint64_t n = 1;
        for (auto extent : shape) n *= static_cast<std::uint64_t>(extent);
        return n;
    }
};

/// A model snapshot at one optimizer step. Tensor order is preserved through
/// serialization; hashing always iterates tensors in ascending name order.
struct Checkpoint {
    std::uint64_t step = 0;
    std::vector<TensorRecord> tensors;

    const TensorRecord* find(std::string_view name) const {
        for (const auto& t : tensors)
            if (t.name == name) return &t;
        return nullptr;
    }

    TensorRecord* find(std::string_view name) {
        for (auto& t : tensors)
            if (t.name == name) return &t;
        return nullptr;
    }

    std::uint64_t total_elements() const {
        std::uint64_t n = 0;
        for (const auto& t : tensors) n += t.numel();
        return n;
    }

    void validate() const {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : tensors) {
            if (t.name.empty()) throw ArgumentError("tensor with empty name");
            if (!seen.insert(t.name).second)
                throw ArgumentError("duplicate tensor name: " + t.name);
            if (t.shape.empty()) throw ArgumentError("tensor " + t.name + " has empty shape");
            std::uint64_t n = 1;
            for (auto extent : t.shape) {
                if (extent <= 0)
                    throw ArgumentError("tensor " + t.name + " has non-positive extent");
                n *= static_cast<std::uint64_t>(extent);
            }
            if (n != t.data.size())
                throw ArgumentError("tensor " + t.name + " shape/data length mismatch");
        }
    }
};

/// Tensor indices sorted ascending by name — the canonical hashing order.
inline std::vector<std::size_t> sorted_tensor_order(const Checkpoint& c) {
    std::vector<std::size_t> order(c.tensors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return c.tensors[a].name < c.tensors[b].name; });
    return order;
}

}  // namespace pulse
