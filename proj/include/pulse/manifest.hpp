// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulse/container.hpp"
#include "pulse/error.hpp"
#include "pulse/sha256.hpp"
#include "pulse/wire.hpp"

namespace pulse {

namespace detail {

inline void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw Error("libsodium initialization failed");
}

inline std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

inline Bytes hex_to_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) throw FormatError("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw FormatError("invalid hex character");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
    ensure_sodium();
    std::string out(sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
    sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(),
                      sodium_base64_VARIANT_ORIGINAL);
    out.resize(out.find('\0'));
    return out;
}

inline Bytes base64_decode(std::string_view text) {
    ensure_sodium();
    Bytes out(text.size());
    std::size_t decoded = 0;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &decoded,
                          nullptr, sodium_base64_VARIANT_ORIGINAL) != 0)
        throw FormatError("invalid base64 data");
    out.resize(decoded);
    return out;
}

}  // namespace detail

/// Identifier of a public key: hex of the first 8 bytes of its SHA-256.
inline std::string key_id_of(std::span<const std::uint8_t> public_key) {
    const Sha256Digest d = Sha256::digest(public_key);
    return detail::bytes_to_hex(std::span(d.bytes).first(8));
}

/// Verifies Ed25519 detached signatures from a public key.
class Verifier {
public:
    explicit Verifier(std::span<const std::uint8_t> public_key) {
        detail::ensure_sodium();
        if (public_key.size() != crypto_sign_PUBLICKEYBYTES)
            throw ArgumentError("public key must be 32 bytes");
        std::copy(public_key.begin(), public_key.end(), public_.begin());
    }

    bool verify(std::span<const std::uint8_t> message,
                std::span<const std::uint8_t> signature) const {
        if (signature.size() != crypto_sign_BYTES) return false;
        return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                           public_.data()) == 0;
    }

    std::span<const std::uint8_t> public_key() const { return public_; }
    std::string key_id() const { return key_id_of(public_); }

private:
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> public_{};
};

/// Ed25519 signing key pair.
class Signer {
public:
    static Signer generate() {
        detail::ensure_sodium();
        Signer s;
        crypto_sign_keypair(s.public_.data(), s.secret_.data());
        return s;
    }

    /// Deterministic key pair from a 32-byte seed.
    static Signer from_seed(std::span<const std::uint8_t> seed) {
        detail::ensure_sodium();
        if (seed.size() != crypto_sign_SEEDBYTES) throw ArgumentError("seed must be 32 bytes");
        Signer s;
        crypto_sign_seed_keypair(s.public_.data(), s.secret_.data(), seed.data());
        return s;
    }

    static Signer from_keys(std::span<const std::uint8_t> public_key,
                            std::span<const std::uint8_t> secret_key) {
        detail::ensure_sodium();
        if (public_key.size() != crypto_sign_PUBLICKEYBYTES ||
            secret_key.size() != crypto_sign_SECRETKEYBYTES)
            throw ArgumentError("ed25519 key pair must be 32 + 64 bytes");
        Signer s;
        std::copy(public_key.begin(), public_key.end(), s.public_.begin());
        std::copy(secret_key.begin(), secret_key.end(), s.secret_.begin());
        return s;
    }

    std::array<std::uint8_t, crypto_sign_BYTES> sign(std::span<const std::uint8_t> message) const {
        std::array<std::uint8_t, crypto_sign_BYTES> sig{};
        if (crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                                 secret_.data()) != 0)
            throw Error("signing failed");
        return sig;
    }

    std::span<const std::uint8_t> public_key() const { return public_; }
    std::span<const std::uint8_t> secret_key() const { return secret_; }
    std::string key_id() const { return key_id_of(public_); }
    Verifier verifier() const { return Verifier(public_); }

private:
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> public_{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> secret_{};
};

enum class ManifestKind { Full, Delta };

inline std::string_view manifest_kind_name(ManifestKind k) {
    return k == ManifestKind::Full ? "FULL" : "DELTA";
}

inline ManifestKind manifest_kind_from_name(std::string_view name) {
    if (name == "FULL") return ManifestKind::Full;
    if (name == "DELTA") return ManifestKind::Delta;
    throw FormatError("unknown manifest kind: " + std::string(name));
}

struct FileEntry {
    std::string key;
    std::uint64_t length = 0;
    Sha256Digest sha256;

    friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

/// Signed description of one published checkpoint object set. FULL
/// manifests describe a self-contained container (anchor_step == step);
/// DELTA manifests describe a patch from step-1 and name the anchor their
/// recovery chain roots at.
struct Manifest {
    std::uint64_t step = 0;
    ManifestKind kind = ManifestKind::Delta;
    std::uint64_t anchor_step = 0;
    std::optional<std::uint64_t> base_step;  // DELTA only, always step - 1
    std::vector<FileEntry> files;
    WeightsHash weights_hash;
    std::string key_id;     // identifies the publisher's public key
    std::string signature;  // base64 Ed25519 over canonical_manifest_bytes

    friend bool operator==(const Manifest&, const Manifest&) = default;

    void validate() const {
        if (kind == ManifestKind::Full) {
            if (anchor_step != step) throw FormatError("FULL manifest must be its own anchor");
            if (base_step) throw FormatError("FULL manifest must not carry a base step");
        } else {
            if (!base_step || *base_step + 1 != step)
                throw FormatError("DELTA manifest base step must be step - 1");
            if (anchor_step > step) throw FormatError("DELTA manifest anchor lies after its step");
        }
        if (files.empty()) throw FormatError("manifest lists no files");
    }
};

namespace detail {

inline nlohmann::json manifest_to_json(const Manifest& m, bool include_signature) {
    nlohmann::json files = nlohmann::json::array();
    for (const FileEntry& f : m.files)
        files.push_back({{"key", f.key}, {"length", f.length}, {"sha256", f.sha256.hex()}});
    nlohmann::json j{
        {"step", m.step},
        {"kind", std::string(manifest_kind_name(m.kind))},
        {"anchor_step", m.anchor_step},
        {"files", std::move(files)},
        {"weights_hash", m.weights_hash.hex()},
        {"key_id", m.key_id},
    };
    if (m.base_step) j["base_step"] = *m.base_step;
    if (include_signature) j["signature"] = m.signature;
    return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    try {
        Manifest m;
        m.step = j.at("step").get<std::uint64_t>();
        m.kind = manifest_kind_from_name(j.at("kind").get<std::string>());
        m.anchor_step = j.at("anchor_step").get<std::uint64_t>();
        if (j.contains("base_step")) m.base_step = j.at("base_step").get<std::uint64_t>();
        for (const auto& f : j.at("files")) {
            FileEntry e;
            e.key = f.at("key").get<std::string>();
            e.length = f.at("length").get<std::uint64_t>();
            e.sha256 = Sha256Digest::from_hex(f.at("sha256").get<std::string>());
            m.files.push_back(std::move(e));
        }
        m.weights_hash = Sha256Digest::from_hex(j.at("weights_hash").get<std::string>());
        m.key_id = j.at("key_id").get<std::string>();
        m.signature = j.value("signature", std::string());
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
}

}  // namespace detail

/// The byte sequence the signature covers: the manifest as compact JSON
/// with sorted keys and the signature field absent.
inline Bytes canonical_manifest_bytes(const Manifest& m) {
    const std::string text = detail::manifest_to_json(m, false).dump();
    return Bytes(text.begin(), text.end());
}

inline void sign_manifest(Manifest& m, const Signer& signer) {
    m.key_id = signer.key_id();
    const Bytes canon = canonical_manifest_bytes(m);
    m.signature = detail::base64_encode(signer.sign(canon));
}

inline bool verify_manifest_signature(const Manifest& m, const Verifier& verifier) {
    if (m.signature.empty() || m.key_id != verifier.key_id()) return false;
    Bytes sig;
    try {
        sig = detail::base64_decode(m.signature);
    } catch (const FormatError&) {
        return false;
    }
    return verifier.verify(canonical_manifest_bytes(m), sig);
}

/// True iff the signature is valid and every listed file's bytes are
/// present with matching length and SHA-256.
inline bool verify_manifest(const Manifest& m, const std::map<std::string, Bytes>& files,
                            const Verifier& verifier) {
    if (!verify_manifest_signature(m, verifier)) return false;
    for (const FileEntry& f : m.files) {
        auto it = files.find(f.key);
        if (it == files.end()) return false;
        if (it->second.size() != f.length) return false;
        if (Sha256::digest(it->second) != f.sha256) return false;
    }
    return true;
}

/// One manifest.json object holds every manifest published at a step:
/// a JSON array with one DELTA entry and, at anchor steps, one FULL entry.
inline Bytes write_manifest_array(const std::vector<Manifest>& manifests) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Manifest& m : manifests) arr.push_back(detail::manifest_to_json(m, true));
    const std::string text = arr.dump();
    return Bytes(text.begin(), text.end());
}

inline std::vector<Manifest> read_manifest_array(std::span<const std::uint8_t> bytes) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest array: ") + e.what());
    }
    if (!arr.is_array()) throw FormatError("manifest object must be a JSON array");
    std::vector<Manifest> out;
    for (const auto& j : arr) out.push_back(detail::manifest_from_json(j));
    return out;
}

/// Key files are small JSON documents; the secret file holds both halves
/// of the pair, the public file only the verification half.
inline void save_signing_key(const Signer& s, const std::filesystem::path& path) {
    const nlohmann::json j{
        {"algorithm", "ed25519"},
        {"public_key", detail::bytes_to_hex(s.public_key())},
        {"secret_key", detail::bytes_to_hex(s.secret_key())},
    };
    const std::string text = j.dump(2) + "\n";
    detail::write_file_bytes(
        path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void save_public_key(const Verifier& v, const std::filesystem::path& path) {
    const nlohmann::json j{
        {"algorithm", "ed25519"},
        {"public_key", detail::bytes_to_hex(v.public_key())},
    };
    const std::string text = j.dump(2) + "\n";
    detail::write_file_bytes(
        path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace detail {

inline nlohmann::json read_key_file(const std::filesystem::path& path) {
    const Bytes raw = read_file_bytes(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw.begin(), raw.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed key file: ") + e.what());
    }
    if (j.value("algorithm", "") != "ed25519")
        throw FormatError("key file algorithm must be ed25519");
    return j;
}

}  // namespace detail

inline Signer load_signing_key(const std::filesystem::path& path) {
    const nlohmann::json j = detail::read_key_file(path);
    if (!j.contains("secret_key")) throw FormatError("key file has no secret key");
    const Bytes pub = detail::hex_to_bytes(j.at("public_key").get<std::string>());
    const Bytes sec = detail::hex_to_bytes(j.at("secret_key").get<std::string>());
    return Signer::from_keys(pub, sec);
}

inline Verifier load_public_key(const std::filesystem::path& path) {
    const nlohmann::json j = detail::read_key_file(path);
    const Bytes pub = detail::hex_to_bytes(j.at("public_key").get<std::string>());
    if (pub.size() != crypto_sign_PUBLICKEYBYTES) throw FormatError("public key must be 32 bytes");
    return Verifier(pub);
}

}  // namespace pulse
