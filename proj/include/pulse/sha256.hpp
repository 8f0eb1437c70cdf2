// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>

#include "pulse/checkpoint.hpp"
#include "pulse/error.hpp"
#include "pulse/wire.hpp"

namespace pulse {

struct Sha256Digest {
    std::array<std::uint8_t, 32> bytes{};

    friend bool operator==(const Sha256Digest& a, const Sha256Digest& b) = default;

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string s;
        s.reserve(64);
        for (auto b : bytes) {
            s.push_back(digits[b >> 4]);
            s.push_back(digits[b & 0xF]);
        }
        return s;
    }

    static Sha256Digest from_hex(std::string_view hex) {
        if (hex.size() != 64) throw FormatError("sha256 hex digest must be 64 characters");
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw FormatError("invalid hex character in digest");
        };
        Sha256Digest d;
        for (std::size_t i = 0; i < 32; ++i)
            d.bytes[i] =
                static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
        return d;
    }
};

/// Incremental SHA-256 over byte spans.
class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            throw Error("failed to initialize SHA-256 context");
    }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    ~Sha256() { EVP_MD_CTX_free(ctx_); }

    void update(std::span<const std::uint8_t> data) {
        if (EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1)
            throw Error("SHA-256 update failed");
    }

    Sha256Digest finish() {
        Sha256Digest d;
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, d.bytes.data(), &len) != 1 || len != 32)
            throw Error("SHA-256 finalize failed");
        return d;
    }

    static Sha256Digest digest(std::span<const std::uint8_t> data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

    static Sha256Digest digest(std::string_view data) {
        return digest(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
    }

private:
    EVP_MD_CTX* ctx_;
};

using WeightsHash = Sha256Digest;

/// SHA-256 over the concatenated raw BF16 byte pairs, little-endian per
/// value, tensors in ascending name order, elements row-major.
inline WeightsHash hash_weights(const Checkpoint& c) {
    Sha256 h;
    if constexpr (std::endian::native == std::endian::little) {
        // Bf16 is a single uint16_t, so the in-memory layout already matches
        // the wire byte order on little-endian targets.
        static_assert(sizeof(Bf16) == 2);
        for (auto idx : sorted_tensor_order(c)) {
            const auto& data = c.tensors[idx].data;
            h.update({reinterpret_cast<const std::uint8_t*>(data.data()), data.size() * 2});
        }
    } else {
        Bytes buf;
        for (auto idx : sorted_tensor_order(c)) {
            buf.clear();
            buf.reserve(c.tensors[idx].data.size() * 2);
            for (auto v : c.tensors[idx].data) {
                buf.push_back(static_cast<std::uint8_t>(v.bits));
                buf.push_back(static_cast<std::uint8_t>(v.bits >> 8));
            }
            h.update(buf);
        }
    }
    return h.finish();
}

}  // namespace pulse
