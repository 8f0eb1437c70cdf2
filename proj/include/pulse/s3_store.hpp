// SPDX-License-Identifier: Apache-2.0
#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <algorithm>
#include <cstdint>
#include <ctime>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pulse/error.hpp"
#include "pulse/object_store.hpp"
#include "pulse/sha256.hpp"
#include "pulse/sigv4.hpp"

namespace pulse {

struct S3Config {
    std::string endpoint;  // e.g. http://127.0.0.1:9000 or https://s3.example.com
    std::string bucket;
    std::string region = "us-east-1";
    SigV4Credentials credentials;
    std::uint64_t list_page_size = 1000;

    void validate() const {
        if (endpoint.empty()) throw ArgumentError("s3 endpoint is empty");
        if (bucket.empty()) throw ArgumentError("s3 bucket is empty");
        if (region.empty()) throw ArgumentError("s3 region is empty");
        if (list_page_size < 1) throw ArgumentError("s3 list page size must be positive");
    }
};

namespace detail {

/// Splits an endpoint URL into the httplib base and the Host header value
/// (host, plus the port when it is not the scheme default).
inline std::pair<std::string, std::string> parse_endpoint(std::string_view endpoint) {
    std::string_view rest = endpoint;
    std::string_view scheme = "http";
    if (rest.rfind("https://", 0) == 0) {
        scheme = "https";
        rest.remove_prefix(8);
    } else if (rest.rfind("http://", 0) == 0) {
        rest.remove_prefix(7);
    } else {
        throw ArgumentError("s3 endpoint must start with http:// or https://");
    }
    while (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
    if (rest.empty() || rest.find('/') != std::string_view::npos)
        throw ArgumentError("s3 endpoint must be scheme://host[:port] with no path");

    std::string host(rest);
    const std::size_t colon = host.rfind(':');
    if (colon != std::string::npos) {
        const std::string port = host.substr(colon + 1);
        if ((scheme == "http" && port == "80") || (scheme == "https" && port == "443"))
            host.resize(colon);
    }
    return {std::string(scheme) + "://" + std::string(rest), host};
}

/// Replaces the five predefined XML entities; S3 escapes keys this way in
/// list responses.
inline std::string xml_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const auto try_entity = [&](std::string_view entity, char replacement) {
            if (s.compare(i, entity.size(), entity) != 0) return false;
            out.push_back(replacement);
            i += entity.size();
            return true;
        };
        if (!try_entity("&amp;", '&') && !try_entity("&lt;", '<') && !try_entity("&gt;", '>') &&
            !try_entity("&quot;", '"') && !try_entity("&apos;", '\''))
            out.push_back(s[i++]);
    }
    return out;
}

/// Extracts the text of every `<tag>...</tag>` occurrence, unescaped.
inline std::vector<std::string> xml_field_values(std::string_view xml, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t start = xml.find(open, pos);
        if (start == std::string_view::npos) break;
        const std::size_t body = start + open.size();
        const std::size_t end = xml.find(close, body);
        if (end == std::string_view::npos) break;
        out.push_back(xml_unescape(xml.substr(body, end - body)));
        pos = end + close.size();
    }
    return out;
}

inline std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[20];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

}  // namespace detail

/// S3-compatible store over path-style addressing: every request is
/// SigV4-signed with the payload hash in x-amz-content-sha256, and listing
/// uses ListObjectsV2 with continuation tokens.
class S3Store : public ObjectStore {
public:
    explicit S3Store(S3Config config) : config_(std::move(config)) {
        config_.validate();
        auto [base, host] = detail::parse_endpoint(config_.endpoint);
        host_ = std::move(host);
        client_ = std::make_unique<httplib::Client>(base);
        client_->set_keep_alive(true);
    }

    void put(std::string_view key, std::span<const std::uint8_t> bytes) override {
        detail::validate_key(key);
        const std::string body(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        const auto res = request("PUT", object_path(key), {}, body);
        if (res->status != 200)
            throw StoreError("s3 put of " + std::string(key) + " failed: " + status_line(*res));
    }

    Bytes get(std::string_view key) override {
        detail::validate_key(key);
        const auto res = request("GET", object_path(key), {}, std::nullopt);
        if (res->status == 404) throw MissingKeyError("no such object: " + std::string(key));
        if (res->status != 200)
            throw StoreError("s3 get of " + std::string(key) + " failed: " + status_line(*res));
        return Bytes(res->body.begin(), res->body.end());
    }

    std::vector<std::string> list(std::string_view prefix) override {
        std::vector<std::string> keys;
        std::string token;
        while (true) {
            std::vector<std::pair<std::string, std::string>> query{
                {"list-type", "2"},
                {"max-keys", std::to_string(config_.list_page_size)},
            };
            if (!prefix.empty()) query.emplace_back("prefix", std::string(prefix));
            if (!token.empty()) query.emplace_back("continuation-token", token);

            const auto res = request("GET", "/" + config_.bucket, query, std::nullopt);
            if (res->status != 200) throw StoreError("s3 list failed: " + status_line(*res));

            for (std::string& key : detail::xml_field_values(res->body, "Key"))
                keys.push_back(std::move(key));

            const auto truncated = detail::xml_field_values(res->body, "IsTruncated");
            if (truncated.empty() || truncated.front() != "true") break;
            const auto next = detail::xml_field_values(res->body, "NextContinuationToken");
            if (next.empty())
                throw StoreError("s3 list response is truncated but carries no token");
            token = next.front();
        }
        std::sort(keys.begin(), keys.end());
        return keys;
    }

    void remove(std::string_view key) override {
        detail::validate_key(key);
        const auto res = request("DELETE", object_path(key), {}, std::nullopt);
        if (res->status != 204 && res->status != 200 && res->status != 404)
            throw StoreError("s3 delete of " + std::string(key) + " failed: " + status_line(*res));
    }

private:
    std::string object_path(std::string_view key) const {
        return "/" + config_.bucket + "/" + std::string(key);
    }

    static std::string status_line(const httplib::Response& res) {
        std::string line = "HTTP " + std::to_string(res.status);
        const auto codes = detail::xml_field_values(res.body, "Code");
        if (!codes.empty()) line += " (" + codes.front() + ")";
        return line;
    }

    httplib::Result request(const std::string& method, const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& query,
                            const std::optional<std::string>& body) {
        SigV4Request r;
        r.method = method;
        r.path = path;
        r.query = query;
        r.amz_date = detail::utc_timestamp_now();
        r.payload_hash = body ? Sha256::digest(*body).hex()
                              : "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
        r.headers = {
            {"host", host_},
            {"x-amz-content-sha256", r.payload_hash},
            {"x-amz-date", r.amz_date},
        };

        httplib::Headers headers{
            {"x-amz-content-sha256", r.payload_hash},
            {"x-amz-date", r.amz_date},
            {"Authorization",
             sigv4_authorization_header(r, config_.credentials, config_.region, "s3")},
        };

        std::string target = sigv4_uri_encode(path, false);
        const std::string query_string = sigv4_canonical_query(query);
        if (!query_string.empty()) target += "?" + query_string;

        std::lock_guard lock(mutex_);
        httplib::Result res = body
                                  ? client_->Put(target, headers, *body, "application/octet-stream")
                              : method == "DELETE" ? client_->Delete(target, headers)
                                                   : client_->Get(target, headers);
        if (!res)
            throw StoreUnreachableError("s3 endpoint " + config_.endpoint +
                                        " unreachable: " + httplib::to_string(res.error()));
        return res;
    }

    S3Config config_;
    std::string host_;
    std::unique_ptr<httplib::Client> client_;
    std::mutex mutex_;
};

}  // namespace pulse
