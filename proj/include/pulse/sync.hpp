// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pulse/checkpoint.hpp"
#include "pulse/container.hpp"
#include "pulse/error.hpp"
#include "pulse/manifest.hpp"
#include "pulse/object_store.hpp"
#include "pulse/patch.hpp"
#include "pulse/patch_file.hpp"
#include "pulse/sha256.hpp"

namespace pulse {

namespace keys {

inline constexpr std::string_view kCheckpointPrefix = "checkpoints/";
inline constexpr std::string_view kReadyPrefix = "ready/";

inline std::string manifest(std::uint64_t step) {
    return "checkpoints/" + std::to_string(step) + "/manifest.json";
}
inline std::string full(std::uint64_t step) {
    return "checkpoints/" + std::to_string(step) + "/full.pulc";
}
inline std::string delta(std::uint64_t step) {
    return "checkpoints/" + std::to_string(step) + "/delta.pulp";
}
inline std::string ready(std::uint64_t step) {
    return "ready/" + std::to_string(step);
}

inline std::optional<std::uint64_t> parse_step_suffix(std::string_view key,
                                                      std::string_view prefix) {
    if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0)
        return std::nullopt;
    const std::string_view tail = key.substr(prefix.size());
    const std::string_view digits = tail.substr(0, tail.find('/'));
    std::uint64_t step = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), step);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return step;
}

}  // namespace keys

struct SyncConfig {
    std::uint64_t anchor_interval = 50;
    SparseRepresentation representation = SparseRepresentation::CooDownscaled;
    CodecId codec = CodecId::Zstd1;

    void validate() const {
        if (anchor_interval < 1) throw ArgumentError("anchor interval must be at least 1");
    }
};

struct RetentionPolicy {
    std::uint64_t max_deltas = 100;
    std::uint64_t max_fulls = 10;

    void validate() const {
        if (max_deltas < 1 || max_fulls < 1)
            throw ArgumentError("retention limits must be positive");
    }
};

/// What a consumer holds between synchronize calls.
struct SyncState {
    std::uint64_t step = 0;
    WeightsHash weights_hash;
    Checkpoint checkpoint;
    std::uint64_t last_anchor_step = 0;

    void validate() const {
        if (checkpoint.step != step)
            throw ArgumentError("sync state step disagrees with checkpoint");
        if (hash_weights(checkpoint) != weights_hash)
            throw ArgumentError("sync state hash disagrees with held checkpoint");
    }
};

namespace detail {

inline FileEntry file_entry_for(std::string key, std::span<const std::uint8_t> bytes) {
    FileEntry e;
    e.key = std::move(key);
    e.length = bytes.size();
    e.sha256 = Sha256::digest(bytes);
    return e;
}

inline Manifest make_full_manifest(std::uint64_t step, const FileEntry& file,
                                   const WeightsHash& hash) {
    Manifest m;
    m.step = step;
    m.kind = ManifestKind::Full;
    m.anchor_step = step;
    m.files = {file};
    m.weights_hash = hash;
    return m;
}

inline Manifest make_delta_manifest(std::uint64_t step, std::uint64_t anchor_step,
                                    const FileEntry& file, const WeightsHash& hash) {
    Manifest m;
    m.step = step;
    m.kind = ManifestKind::Delta;
    m.anchor_step = anchor_step;
    m.base_step = step - 1;
    m.files = {file};
    m.weights_hash = hash;
    return m;
}

/// Uploads a FULL container, retrying once before surfacing the failure: an
/// anchor that never lands would leave every later delta unreachable.
inline void put_with_retry(ObjectStore& store, const std::string& key,
                           std::span<const std::uint8_t> bytes) {
    try {
        store.put(key, bytes);
    } catch (const StoreError&) {
        store.put(key, bytes);
    }
}

}  // namespace detail

/// Publishes the chain's starting FULL checkpoint. The step must be a
/// multiple of the anchor interval so later deltas' anchor arithmetic lands
/// on it; step 0 is the usual start.
inline Manifest publish_initial(const Checkpoint& checkpoint, ObjectStore& store,
                                const Signer& signer, const SyncConfig& config = {}) {
    config.validate();
    checkpoint.validate();
    if (checkpoint.step % config.anchor_interval != 0)
        throw ArgumentError("initial step must be a multiple of the anchor interval");

    const Bytes container = write_checkpoint_bytes(checkpoint);
    const std::string full_key = keys::full(checkpoint.step);
    detail::put_with_retry(store, full_key, container);

    Manifest m = detail::make_full_manifest(
        checkpoint.step, detail::file_entry_for(full_key, container), hash_weights(checkpoint));
    sign_manifest(m, signer);
    store.put(keys::manifest(checkpoint.step), write_manifest_array({m}));
    store.put(keys::ready(checkpoint.step), Bytes{});
    return m;
}

/// Publishes step t = previous.step + 1: a DELTA patch always, plus a FULL
/// container at anchor steps (t divisible by the interval). If the delta
/// upload fails the step degrades to FULL-only so the chain stays
/// consumable. The ready marker is written last, after every object it
/// announces is complete.
inline std::vector<Manifest> publish_checkpoint(const Checkpoint& current,
                                                const Checkpoint& previous, ObjectStore& store,
                                                const Signer& signer,
                                                const SyncConfig& config = {}) {
    config.validate();
    if (current.step != previous.step + 1)
        throw ArgumentError("publish requires consecutive steps");

    const std::uint64_t t = current.step;
    const std::uint64_t anchor = (t / config.anchor_interval) * config.anchor_interval;
    const WeightsHash hash = hash_weights(current);
    const bool anchor_step = t % config.anchor_interval == 0;

    SparsePatch patch = encode(current, previous, config.representation, config.codec);
    patch.anchor_step = anchor;
    const Bytes patch_bytes = write_patch_bytes(patch);

    std::optional<Manifest> delta_manifest;
    const std::string delta_key = keys::delta(t);
    bool need_full = anchor_step;
    try {
        store.put(delta_key, patch_bytes);
        delta_manifest = detail::make_delta_manifest(
            t, anchor, detail::file_entry_for(delta_key, patch_bytes), hash);
    } catch (const StoreError&) {
        need_full = true;
    }

    std::optional<Manifest> full_manifest;
    if (need_full) {
        const Bytes container = write_checkpoint_bytes(current);
        const std::string full_key = keys::full(t);
        detail::put_with_retry(store, full_key, container);
        full_manifest =
            detail::make_full_manifest(t, detail::file_entry_for(full_key, container), hash);
    }

    std::vector<Manifest> manifests;
    if (delta_manifest) manifests.push_back(std::move(*delta_manifest));
    if (full_manifest) manifests.push_back(std::move(*full_manifest));
    for (Manifest& m : manifests) sign_manifest(m, signer);

    store.put(keys::manifest(t), write_manifest_array(manifests));
    store.put(keys::ready(t), Bytes{});
    return manifests;
}

enum class SyncPath { AlreadySynchronized, FastPath, SlowPath };

inline std::string_view sync_path_name(SyncPath p) {
    switch (p) {
        case SyncPath::AlreadySynchronized:
            return "already-synchronized";
        case SyncPath::FastPath:
            return "fast";
        default:
            return "slow";
    }
}

struct SyncReport {
    SyncPath path = SyncPath::AlreadySynchronized;
    SyncState state;
    std::uint64_t deltas_applied = 0;
    bool full_downloaded = false;
    bool recovered = false;  // a corrupt object forced a restart from the anchor
};

namespace detail {

/// Fetches and signature-checks the manifest array for one step.
inline std::vector<Manifest> fetch_manifests(ObjectStore& store, const Verifier& verifier,
                                             std::uint64_t step) {
    Bytes raw;
    try {
        raw = store.get(keys::manifest(step));
    } catch (const MissingKeyError&) {
        throw ProtocolViolationError("step " + std::to_string(step) +
                                     " is marked ready but has no manifest");
    }
    std::vector<Manifest> manifests = read_manifest_array(raw);
    if (manifests.empty())
        throw ProtocolViolationError("step " + std::to_string(step) + " has an empty manifest");
    for (const Manifest& m : manifests) {
        if (m.step != step) throw ProtocolViolationError("manifest step disagrees with its key");
        if (!verify_manifest_signature(m, verifier))
            throw SignatureError("manifest signature rejected at step " + std::to_string(step));
    }
    return manifests;
}

inline const Manifest* find_kind(const std::vector<Manifest>& manifests, ManifestKind kind) {
    for (const Manifest& m : manifests)
        if (m.kind == kind) return &m;
    return nullptr;
}

/// Fetches the single file a manifest lists and checks its digest.
/// A digest mismatch is wire corruption, reported as CorruptStreamError so
/// the caller can attempt recovery.
inline Bytes fetch_manifest_file(ObjectStore& store, const Manifest& m) {
    const FileEntry& entry = m.files.front();
    Bytes raw;
    try {
        raw = store.get(entry.key);
    } catch (const MissingKeyError&) {
        throw ProtocolViolationError("object " + entry.key +
                                     " is referenced by a ready step but missing");
    }
    if (raw.size() != entry.length || Sha256::digest(raw) != entry.sha256)
        throw CorruptStreamError("stored object " + entry.key +
                                 " does not match its manifest digest");
    return raw;
}

inline SyncState checkpoint_to_state(Checkpoint&& c, std::uint64_t anchor_step) {
    SyncState s;
    s.step = c.step;
    s.weights_hash = hash_weights(c);
    s.checkpoint = std::move(c);
    s.last_anchor_step = anchor_step;
    return s;
}

/// Downloads the FULL container at `step` and verifies it end to end.
inline SyncState download_full(ObjectStore& store, const Verifier& verifier, std::uint64_t step) {
    const std::vector<Manifest> manifests = fetch_manifests(store, verifier, step);
    const Manifest* full = find_kind(manifests, ManifestKind::Full);
    if (!full)
        throw ProtocolViolationError("no FULL manifest at anchor step " + std::to_string(step));
    const Bytes container = fetch_manifest_file(store, *full);
    Checkpoint c = read_checkpoint_bytes(container);
    if (c.step != step)
        throw ProtocolViolationError("FULL container step disagrees with its manifest");
    const WeightsHash actual = hash_weights(c);
    if (actual != full->weights_hash)
        throw HashMismatchError(full->weights_hash.hex(), actual.hex());
    return checkpoint_to_state(std::move(c), step);
}

/// Applies an already-fetched, digest-checked delta for `step` on top of
/// `state`.
inline void apply_delta(SyncState& state, std::uint64_t step, const Manifest& delta,
                        const Bytes& patch_bytes) {
    if (delta.base_step != state.step)
        throw ProtocolViolationError("delta at step " + std::to_string(step) +
                                     " does not base on the held step");
    SparsePatch patch = read_patch_bytes(patch_bytes);
    if (patch.target_step != step || patch.base_step != state.step)
        throw ProtocolViolationError("patch steps disagree with the manifest");
    if (patch.target_hash != delta.weights_hash)
        throw ProtocolViolationError("patch target hash disagrees with the manifest");
    Checkpoint next = decode(state.checkpoint, patch);  // asserts the weights hash
    state.step = step;
    state.weights_hash = patch.target_hash;
    state.checkpoint = std::move(next);
    // A fallback FULL can outrank the delta's formula anchor; the nearest
    // root the consumer actually chains from never moves backwards.
    state.last_anchor_step = std::max(state.last_anchor_step, delta.anchor_step);
}

/// Walks deltas (from+1 .. to) on top of `state`, overlapping each fetch
/// with the previous step's decode. Correctness does not depend on the
/// overlap; it only hides download latency.
inline std::uint64_t walk_deltas(ObjectStore& store, const Verifier& verifier, SyncState& state,
                                 std::uint64_t to) {
    if (state.step >= to) return 0;
    std::uint64_t applied = 0;
    auto fetch_step = [&store, &verifier](std::uint64_t step) {
        std::vector<Manifest> manifests = fetch_manifests(store, verifier, step);
        const Manifest* delta = find_kind(manifests, ManifestKind::Delta);
        if (!delta)
            throw ProtocolViolationError("no DELTA manifest at step " + std::to_string(step));
        Bytes bytes = fetch_manifest_file(store, *delta);
        return std::make_pair(*delta, std::move(bytes));
    };

    std::future<std::pair<Manifest, Bytes>> next =
        std::async(std::launch::async, fetch_step, state.step + 1);
    for (std::uint64_t step = state.step + 1; step <= to; ++step) {
        auto [delta, bytes] = next.get();
        if (step < to) next = std::async(std::launch::async, fetch_step, step + 1);
        apply_delta(state, step, delta, bytes);
        ++applied;
    }
    return applied;
}

inline std::vector<std::uint64_t> ready_steps(ObjectStore& store) {
    std::vector<std::uint64_t> steps;
    for (const std::string& key : store.list(std::string(keys::kReadyPrefix)))
        if (auto step = keys::parse_step_suffix(key, keys::kReadyPrefix)) steps.push_back(*step);
    std::sort(steps.begin(), steps.end());
    return steps;
}

inline std::vector<std::uint64_t> full_steps(ObjectStore& store) {
    std::vector<std::uint64_t> steps;
    for (const std::string& key : store.list(std::string(keys::kCheckpointPrefix))) {
        const auto step = keys::parse_step_suffix(key, keys::kCheckpointPrefix);
        if (step && key == keys::full(*step)) steps.push_back(*step);
    }
    std::sort(steps.begin(), steps.end());
    return steps;
}

/// One slow-path pass: root at the newest FULL at or below `latest`, then
/// walk deltas up to `latest`. Ignores any held state.
inline SyncReport slow_path(ObjectStore& store, const Verifier& verifier, std::uint64_t latest,
                            bool recovered) {
    const std::vector<std::uint64_t> fulls = full_steps(store);
    auto it = std::upper_bound(fulls.begin(), fulls.end(), latest);
    if (it == fulls.begin())
        throw ProtocolViolationError("no FULL checkpoint at or below the latest ready step");
    const std::uint64_t root = *std::prev(it);

    SyncReport report;
    report.path = SyncPath::SlowPath;
    report.recovered = recovered;
    report.full_downloaded = true;
    report.state = download_full(store, verifier, root);
    report.deltas_applied = walk_deltas(store, verifier, report.state, latest);
    return report;
}

}  // namespace detail

/// Brings a consumer to the newest ready step. With no local state this is
/// a cold start (anchor download plus the delta chain). A node one step
/// behind takes the fast path: exactly one patch object is fetched. A node
/// further behind walks every intermediate delta, re-rooting at an anchor
/// only when its held step predates one. Any corrupt object triggers one
/// recovery pass that discards local state and re-roots at the anchor; a
/// second corruption in the same call propagates.
inline SyncReport synchronize(ObjectStore& store, const Verifier& verifier,
                              std::optional<SyncState> local = std::nullopt) {
    if (local) local->validate();

    const std::vector<std::uint64_t> ready = detail::ready_steps(store);
    if (ready.empty()) throw ProtocolViolationError("no published checkpoints");
    const std::uint64_t latest = ready.back();

    if (local && local->step == latest) {
        SyncReport report;
        report.path = SyncPath::AlreadySynchronized;
        report.state = std::move(*local);
        return report;
    }
    if (local && local->step > latest)
        throw ProtocolViolationError("local step is ahead of the published chain");

    try {
        if (local && local->step + 1 == latest) {
            const std::vector<Manifest> manifests =
                detail::fetch_manifests(store, verifier, latest);
            const Manifest* delta = detail::find_kind(manifests, ManifestKind::Delta);
            if (delta) {
                const Bytes bytes = detail::fetch_manifest_file(store, *delta);
                SyncReport report;
                report.path = SyncPath::FastPath;
                report.state = std::move(*local);
                detail::apply_delta(report.state, latest, *delta, bytes);
                report.deltas_applied = 1;
                return report;
            }
            // The step degraded to FULL-only (delta-upload fallback).
            SyncReport report;
            report.path = SyncPath::SlowPath;
            report.full_downloaded = true;
            report.state = detail::download_full(store, verifier, latest);
            return report;
        }

        if (local) {
            const std::vector<std::uint64_t> fulls = detail::full_steps(store);
            auto it = std::upper_bound(fulls.begin(), fulls.end(), latest);
            const std::optional<std::uint64_t> root =
                it == fulls.begin() ? std::nullopt : std::optional(*std::prev(it));
            if (!root || *root <= local->step) {
                // Held state is newer than every anchor below latest: walk
                // the intermediate deltas without re-downloading a FULL.
                SyncReport report;
                report.path = SyncPath::SlowPath;
                report.state = std::move(*local);
                report.deltas_applied = detail::walk_deltas(store, verifier, report.state, latest);
                return report;
            }
        }
        return detail::slow_path(store, verifier, latest, false);
    } catch (const HashMismatchError&) {
        return detail::slow_path(store, verifier, latest, true);
    } catch (const CorruptStreamError&) {
        return detail::slow_path(store, verifier, latest, true);
    }
}

/// Deletes old steps: keeps the newest `max_deltas` delta steps, the newest
/// `max_fulls` full steps, and every FULL still referenced as an anchor by
/// a retained delta. A step's manifest and ready marker survive as long as
/// any of its objects do. Manifests are read unverified — retention is
/// publisher-side housekeeping over its own store. Returns the deleted
/// keys, sorted.
inline std::vector<std::string> apply_retention(ObjectStore& store,
                                                const RetentionPolicy& policy = {}) {
    policy.validate();

    std::vector<std::uint64_t> delta_steps;
    for (const std::string& key : store.list(std::string(keys::kCheckpointPrefix))) {
        const auto step = keys::parse_step_suffix(key, keys::kCheckpointPrefix);
        if (step && key == keys::delta(*step)) delta_steps.push_back(*step);
    }
    std::sort(delta_steps.begin(), delta_steps.end());
    const std::vector<std::uint64_t> fulls = detail::full_steps(store);

    std::set<std::uint64_t> keep_deltas;
    for (std::size_t i =
             delta_steps.size() > policy.max_deltas ? delta_steps.size() - policy.max_deltas : 0;
         i < delta_steps.size(); ++i)
        keep_deltas.insert(delta_steps[i]);

    std::set<std::uint64_t> keep_fulls;
    for (std::size_t i = fulls.size() > policy.max_fulls ? fulls.size() - policy.max_fulls : 0;
         i < fulls.size(); ++i)
        keep_fulls.insert(fulls[i]);

    // Anchors referenced by retained deltas survive even when they fall out
    // of the newest-N window, so every retained delta stays reachable.
    for (const std::uint64_t step : keep_deltas) {
        Bytes raw;
        try {
            raw = store.get(keys::manifest(step));
        } catch (const MissingKeyError&) {
            continue;
        }
        const std::vector<Manifest> manifests = read_manifest_array(raw);
        const Manifest* delta = detail::find_kind(manifests, ManifestKind::Delta);
        if (delta) keep_fulls.insert(delta->anchor_step);
    }

    std::vector<std::string> deleted;
    auto drop = [&store, &deleted](const std::string& key) {
        store.remove(key);
        deleted.push_back(key);
    };

    std::set<std::uint64_t> all_steps;
    for (const std::uint64_t s : delta_steps) all_steps.insert(s);
    for (const std::uint64_t s : fulls) all_steps.insert(s);

    for (const std::uint64_t step : all_steps) {
        const bool had_delta = std::binary_search(delta_steps.begin(), delta_steps.end(), step);
        const bool had_full = std::binary_search(fulls.begin(), fulls.end(), step);
        const bool keep_d = had_delta && keep_deltas.count(step) > 0;
        const bool keep_f = had_full && keep_fulls.count(step) > 0;
        if (had_delta && !keep_d) drop(keys::delta(step));
        if (had_full && !keep_f) drop(keys::full(step));
        if (!keep_d && !keep_f) {
            drop(keys::manifest(step));
            drop(keys::ready(step));
        }
    }
    std::sort(deleted.begin(), deleted.end());
    return deleted;
}

}  // namespace pulse
