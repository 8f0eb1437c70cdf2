// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openssl/core_names.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pulse/error.hpp"
#include "pulse/sha256.hpp"

namespace pulse {

/// AWS Signature Version 4 request signing, enough for S3-compatible
/// object stores: canonical request, string to sign, derived signing key,
/// and the final Authorization header.
struct SigV4Credentials {
    std::string access_key_id;
    std::string secret_access_key;
};

/// The request fields that participate in signing. Header names are
/// lowercased during canonicalization; `host` must be among them. The
/// payload hash is hex SHA-256 of the body (the empty-body digest for
/// bodiless requests).
struct SigV4Request {
    std::string method;
    std::string path = "/";
    std::vector<std::pair<std::string, std::string>> query;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string payload_hash;
    std::string amz_date;  // e.g. 20150830T123600Z
};

namespace detail {

inline std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                                std::string_view data) {
    struct MacHandle {
        EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
        ~MacHandle() { EVP_MAC_free(mac); }
    };
    static const MacHandle handle;
    if (!handle.mac) throw Error("HMAC-SHA256 unavailable");

    EVP_MAC_CTX* ctx = EVP_MAC_CTX_new(handle.mac);
    if (!ctx) throw Error("HMAC context allocation failed");
    char digest_name[] = "SHA256";
    const OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
        OSSL_PARAM_construct_end(),
    };
    std::array<std::uint8_t, 32> out{};
    std::size_t out_len = 0;
    const bool ok =
        EVP_MAC_init(ctx, key.data(), key.size(), params) == 1 &&
        EVP_MAC_update(ctx, reinterpret_cast<const std::uint8_t*>(data.data()), data.size()) == 1 &&
        EVP_MAC_final(ctx, out.data(), &out_len, out.size()) == 1;
    EVP_MAC_CTX_free(ctx);
    if (!ok || out_len != out.size()) throw Error("HMAC-SHA256 computation failed");
    return out;
}

inline std::array<std::uint8_t, 32> hmac_sha256(std::string_view key, std::string_view data) {
    return hmac_sha256(std::span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()),
                       data);
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Collapses interior runs of spaces and strips the ends, as header values
/// are canonicalized.
inline std::string trim_header_value(std::string_view s) {
    std::string out;
    bool in_space = true;
    for (const char c : s) {
        if (c == ' ' || c == '\t') {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace detail

/// Percent-encodes per the SigV4 rules: unreserved characters pass through,
/// everything else becomes uppercase %XX. Path encoding keeps '/'.
inline std::string sigv4_uri_encode(std::string_view s, bool encode_slash) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
                                c == '~';
        if (unreserved || (c == '/' && !encode_slash)) {
            out.push_back(c);
        } else {
            const auto b = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(hex[b >> 4]);
            out.push_back(hex[b & 0xF]);
        }
    }
    return out;
}

inline std::string sigv4_canonical_query(
    const std::vector<std::pair<std::string, std::string>>& query) {
    std::vector<std::pair<std::string, std::string>> encoded;
    encoded.reserve(query.size());
    for (const auto& [k, v] : query)
        encoded.emplace_back(sigv4_uri_encode(k, true), sigv4_uri_encode(v, true));
    std::sort(encoded.begin(), encoded.end());
    std::string out;
    for (const auto& [k, v] : encoded) {
        if (!out.empty()) out.push_back('&');
        out += k;
        out.push_back('=');
        out += v;
    }
    return out;
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> canonical_headers(
    const std::vector<std::pair<std::string, std::string>>& headers) {
    std::vector<std::pair<std::string, std::string>> canon;
    canon.reserve(headers.size());
    for (const auto& [name, value] : headers)
        canon.emplace_back(lowercase(name), trim_header_value(value));
    std::sort(canon.begin(), canon.end());
    return canon;
}

}  // namespace detail

inline std::string sigv4_signed_headers(const SigV4Request& r) {
    const auto canon = detail::canonical_headers(r.headers);
    std::string out;
    for (const auto& [name, value] : canon) {
        if (!out.empty()) out.push_back(';');
        out += name;
    }
    return out;
}

inline std::string sigv4_canonical_request(const SigV4Request& r) {
    std::string out = r.method;
    out.push_back('\n');
    out += sigv4_uri_encode(r.path, false);
    out.push_back('\n');
    out += sigv4_canonical_query(r.query);
    out.push_back('\n');
    for (const auto& [name, value] : detail::canonical_headers(r.headers)) {
        out += name;
        out.push_back(':');
        out += value;
        out.push_back('\n');
    }
    out.push_back('\n');
    out += sigv4_signed_headers(r);
    out.push_back('\n');
    out += r.payload_hash;
    return out;
}

/// Scope string `date/region/service/aws4_request`; the date is the first
/// eight characters of the x-amz-date timestamp.
inline std::string sigv4_scope(std::string_view amz_date, std::string_view region,
                               std::string_view service) {
    if (amz_date.size() < 8) throw ArgumentError("x-amz-date must start with YYYYMMDD");
    std::string out(amz_date.substr(0, 8));
    out.push_back('/');
    out += region;
    out.push_back('/');
    out += service;
    out += "/aws4_request";
    return out;
}

inline std::string sigv4_string_to_sign(const SigV4Request& r, std::string_view region,
                                        std::string_view service) {
    std::string out = "AWS4-HMAC-SHA256\n";
    out += r.amz_date;
    out.push_back('\n');
    out += sigv4_scope(r.amz_date, region, service);
    out.push_back('\n');
    out += Sha256::digest(sigv4_canonical_request(r)).hex();
    return out;
}

inline std::array<std::uint8_t, 32> sigv4_signing_key(std::string_view secret_access_key,
                                                      std::string_view date,
                                                      std::string_view region,
                                                      std::string_view service) {
    const std::string seeded = "AWS4" + std::string(secret_access_key);
    auto k = detail::hmac_sha256(seeded, date);
    k = detail::hmac_sha256(k, region);
    k = detail::hmac_sha256(k, service);
    return detail::hmac_sha256(k, "aws4_request");
}

inline std::string sigv4_signature(const SigV4Request& r, const SigV4Credentials& creds,
                                   std::string_view region, std::string_view service) {
    const auto key =
        sigv4_signing_key(creds.secret_access_key, r.amz_date.substr(0, 8), region, service);
    const auto mac = detail::hmac_sha256(key, sigv4_string_to_sign(r, region, service));
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (const auto b : mac) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xF]);
    }
    return out;
}

inline std::string sigv4_authorization_header(const SigV4Request& r, const SigV4Credentials& creds,
                                              std::string_view region, std::string_view service) {
    std::string out = "AWS4-HMAC-SHA256 Credential=";
    out += creds.access_key_id;
    out.push_back('/');
    out += sigv4_scope(r.amz_date, region, service);
    out += ", SignedHeaders=";
    out += sigv4_signed_headers(r);
    out += ", Signature=";
    out += sigv4_signature(r, creds, region, service);
    return out;
}

}  // namespace pulse
