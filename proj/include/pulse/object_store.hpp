// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulse/container.hpp"
#include "pulse/error.hpp"
#include "pulse/wire.hpp"

namespace pulse {

/// Key/value blob storage with atomic per-object visibility: a get or list
/// never observes a partially written object. Keys are slash-separated
/// paths. `remove` of an absent key succeeds silently, matching S3 DELETE
/// semantics, so retention sweeps are idempotent.
class ObjectStore {
public:
    virtual ~ObjectStore() = default;

    virtual void put(std::string_view key, std::span<const std::uint8_t> bytes) = 0;
    virtual Bytes get(std::string_view key) = 0;
    /// Keys beginning with `prefix`, sorted ascending.
    virtual std::vector<std::string> list(std::string_view prefix) = 0;
    virtual void remove(std::string_view key) = 0;
};

namespace detail {

inline void validate_key(std::string_view key) {
    if (key.empty()) throw ArgumentError("object key is empty");
    if (key.front() == '/' || key.back() == '/')
        throw ArgumentError("object key has a leading or trailing slash: " + std::string(key));
    std::size_t start = 0;
    while (start <= key.size()) {
        const std::size_t end = std::min(key.find('/', start), key.size());
        const std::string_view part = key.substr(start, end - start);
        if (part.empty() || part == "." || part == "..")
            throw ArgumentError("object key has an invalid component: " + std::string(key));
        start = end + 1;
    }
}

}  // namespace detail

/// Process-local store for tests and simulations. Thread-safe.
class MemoryStore : public ObjectStore {
public:
    void put(std::string_view key, std::span<const std::uint8_t> bytes) override {
        detail::validate_key(key);
        Bytes copy(bytes.begin(), bytes.end());
        std::lock_guard lock(mutex_);
        objects_[std::string(key)] = std::move(copy);
    }

    Bytes get(std::string_view key) override {
        detail::validate_key(key);
        std::lock_guard lock(mutex_);
        auto it = objects_.find(std::string(key));
        if (it == objects_.end()) throw MissingKeyError("no such object: " + std::string(key));
        return it->second;
    }

    std::vector<std::string> list(std::string_view prefix) override {
        std::lock_guard lock(mutex_);
        std::vector<std::string> keys;
        for (auto it = objects_.lower_bound(std::string(prefix)); it != objects_.end(); ++it) {
            if (it->first.compare(0, prefix.size(), prefix) != 0) break;
            keys.push_back(it->first);
        }
        return keys;
    }

    void remove(std::string_view key) override {
        detail::validate_key(key);
        std::lock_guard lock(mutex_);
        objects_.erase(std::string(key));
    }

    std::size_t object_count() const {
        std::lock_guard lock(mutex_);
        return objects_.size();
    }

    std::uint64_t total_bytes() const {
        std::lock_guard lock(mutex_);
        std::uint64_t n = 0;
        for (const auto& [key, bytes] : objects_) n += bytes.size();
        return n;
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, Bytes> objects_;
};

/// Filesystem-backed store rooted at a directory. Objects become visible
/// atomically: each put writes a temp file next to the target and renames
/// it into place, so concurrent readers see either the old object, the new
/// object, or no object — never a torn write.
class LocalStore : public ObjectStore {
public:
    explicit LocalStore(std::filesystem::path root) : root_(std::move(root)) {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec)
            throw StoreError("cannot create store root " + root_.string() + ": " + ec.message());
    }

    void put(std::string_view key, std::span<const std::uint8_t> bytes) override {
        detail::validate_key(key);
        const std::filesystem::path target = root_ / std::filesystem::path(key);
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
        if (ec)
            throw StoreError("cannot create directories for " + std::string(key) + ": " +
                             ec.message());

        static std::atomic<std::uint64_t> counter{0};
        const std::filesystem::path temp =
            target.parent_path() /
            (".tmp-" + std::to_string(counter.fetch_add(1)) + "-" + target.filename().string());
        try {
            detail::write_file_bytes(temp, bytes);
        } catch (const Error& e) {
            throw StoreError("write failed for " + std::string(key) + ": " + e.what());
        }
        std::filesystem::rename(temp, target, ec);
        if (ec) {
            std::filesystem::remove(temp, ec);
            throw StoreError("rename failed for " + std::string(key));
        }
    }

    Bytes get(std::string_view key) override {
        detail::validate_key(key);
        const std::filesystem::path target = root_ / std::filesystem::path(key);
        if (!std::filesystem::is_regular_file(target))
            throw MissingKeyError("no such object: " + std::string(key));
        try {
            return detail::read_file_bytes(target);
        } catch (const Error& e) {
            throw StoreError("read failed for " + std::string(key) + ": " + e.what());
        }
    }

    std::vector<std::string> list(std::string_view prefix) override {
        std::vector<std::string> keys;
        if (!std::filesystem::exists(root_)) return keys;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root_)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.rfind(".tmp-", 0) == 0) continue;  // in-flight put
            const std::string key = std::filesystem::relative(entry.path(), root_).generic_string();
            if (key.compare(0, prefix.size(), prefix) == 0) keys.push_back(key);
        }
        std::sort(keys.begin(), keys.end());
        return keys;
    }

    void remove(std::string_view key) override {
        detail::validate_key(key);
        std::error_code ec;
        std::filesystem::remove(root_ / std::filesystem::path(key), ec);
        if (ec) throw StoreError("delete failed for " + std::string(key) + ": " + ec.message());
    }

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

}  // namespace pulse
