// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pulse/bf16.hpp"
#include "pulse/checkpoint.hpp"
#include "pulse/error.hpp"

namespace pulse {

/// True iff adding `delta` to `w` rounds back to the same BF16 bit pattern,
/// i.e. the update is absorbed by the rounding step and the stored weight
/// does not move.
inline bool is_absorbed_exact(Bf16 w, double delta) {
    const double wide = w.to_double();
    if (!std::isfinite(wide)) throw ArgumentError("absorption is defined for finite weights");
    return round_to_bf16(wide + delta).bits == w.bits;
}

/// The magnitude below which updates to `w` are absorbed, as the linearized
/// |w| / 256. The exact cutoff is half the BF16 gap at w, which lies in
/// (|w|/512, |w|/256] for normal w, so this is the conservative end of the
/// bracket. A zero weight has no relative scale; the first representable
/// step away from zero is the smallest positive subnormal.
inline double absorption_threshold(Bf16 w) {
    const double wide = w.to_double();
    if (!std::isfinite(wide)) throw ArgumentError("absorption is defined for finite weights");
    if (wide == 0.0) return 0x1.0p-133;
    return std::abs(wide) * 0x1.0p-8;
}

/// Fraction of weights whose magnitude strictly exceeds `threshold` — the
/// population that cannot receive a non-absorbed update of size
/// threshold/256 or less.
inline double frozen_fraction(const Checkpoint& c, double threshold) {
    const std::uint64_t total = c.total_elements();
    if (total == 0) throw ArgumentError("frozen fraction of an empty checkpoint is undefined");
    std::uint64_t above = 0;
    for (const TensorRecord& t : c.tensors)
        for (Bf16 v : t.data)
            if (std::abs(v.to_double()) > threshold) ++above;
    return static_cast<double>(above) / static_cast<double>(total);
}

struct SparsityReport {
    std::uint64_t k = 1;  // step gap the comparison spans; metadata only
    std::uint64_t changed = 0;
    std::uint64_t total = 0;
    double sparsity = 1.0;  // 1 - changed / total
};

inline SparsityReport sparsity(const Checkpoint& a, const Checkpoint& b, std::uint64_t k = 1) {
    std::vector<std::size_t> order_a = sorted_tensor_order(a);
    std::vector<std::size_t> order_b = sorted_tensor_order(b);
    if (order_a.size() != order_b.size())
        throw TensorSetError("checkpoints have different tensor counts");

    SparsityReport report;
    report.k = k;
    for (std::size_t i = 0; i < order_a.size(); ++i) {
        const TensorRecord& ta = a.tensors[order_a[i]];
        const TensorRecord& tb = b.tensors[order_b[i]];
        if (ta.name != tb.name)
            throw TensorSetError("tensor sets differ: '" + ta.name + "' vs '" + tb.name + "'");
        if (ta.shape != tb.shape)
            throw ShapeMismatchError("tensor '" + ta.name + "' shapes differ");
        for (std::size_t j = 0; j < ta.data.size(); ++j)
            if (ta.data[j] != tb.data[j]) ++report.changed;
        report.total += ta.data.size();
    }
    if (report.total > 0)
        report.sparsity =
            1.0 - static_cast<double>(report.changed) / static_cast<double>(report.total);
    return report;
}

}  // namespace pulse
