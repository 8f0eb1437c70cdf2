// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>

namespace pulse {

/// A bfloat16 value carried by bit pattern. Equality is bitwise: +0 and -0
/// differ, and distinct NaN payloads differ.
struct Bf16 {
    std::uint16_t bits = 0;

    friend bool operator==(Bf16 a, Bf16 b) { return a.bits == b.bits; }
    friend bool operator!=(Bf16 a, Bf16 b) { return a.bits != b.bits; }

    float to_float() const { return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16); }
    double to_double() const { return static_cast<double>(to_float()); }

    static Bf16 from_bits(std::uint16_t b) { return Bf16{b}; }
};

/// Canonical quiet NaN: mantissa MSB set, payload zeroed, sign cleared.
inline constexpr std::uint16_t kBf16CanonicalNanBits = 0x7FC0;

/// Rounds a double to the nearest bfloat16, ties to even. Overflow saturates
/// to ±infinity; every NaN input maps to the canonical quiet NaN. The
/// conversion rounds once, directly from the double — going through float
/// first would round twice and can flip tie cases.
inline Bf16 round_to_bf16(double x) {
    const std::uint64_t db = std::bit_cast<std::uint64_t>(x);
    const auto sign = static_cast<std::uint16_t>((db >> 63) << 15);
    const int raw_exp = static_cast<int>((db >> 52) & 0x7FF);
    const std::uint64_t frac = db & ((std::uint64_t{1} << 52) - 1);

    if (raw_exp == 0x7FF) {
        if (frac != 0) return Bf16{kBf16CanonicalNanBits};
        return Bf16{static_cast<std::uint16_t>(sign | 0x7F80)};
    }
    // Subnormal doubles (< 2^-1022) are far below half the smallest BF16
    // subnormal (2^-134) and round to signed zero.
    if (raw_exp == 0) return Bf16{sign};

    // x = sig * 2^(exp2 - 52), sig in [2^52, 2^53).
    const std::uint64_t sig = frac | (std::uint64_t{1} << 52);
    const int exp2 = raw_exp - 1023;

    // Target significand M = round(|x| / 2^(e-7)): 8 bits for normals,
    // fewer when the value lands in the BF16 subnormal range (e pinned
    // at -126).
    int e = exp2 < -126 ? -126 : exp2;
    const int sh = (e - 7) - (exp2 - 52);
    if (sh >= 54) return Bf16{sign};  // below half of the smallest subnormal
    const std::uint64_t keep = sig >> sh;
    const std::uint64_t rem = sig & ((std::uint64_t{1} << sh) - 1);
    const std::uint64_t half = std::uint64_t{1} << (sh - 1);
    std::uint64_t m = keep + ((rem > half || (rem == half && (keep & 1))) ? 1 : 0);

    if (m == 0) return Bf16{sign};
    if (m >= 256) {
        m >>= 1;
        ++e;
    }
    if (e > 127) return Bf16{static_cast<std::uint16_t>(sign | 0x7F80)};
    if (m < 128) return Bf16{static_cast<std::uint16_t>(sign | m)};  // subnormal, e == -126
    return Bf16{static_cast<std::uint16_t>(sign | ((e + 127) << 7) | (m - 128))};
}

}  // namespace pulse
