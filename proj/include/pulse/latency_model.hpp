// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>

#include "pulse/error.hpp"

namespace pulse {

// Wire-byte throughputs of the consumer pipeline stages.  Downloads move at
// the link rate; decompression, application, and hashing are compute-bound
// rates calibrated against measured synchronization runs.
struct LatencyProfile {
    double bandwidth_bps = 400e6;
    double decompress_bytes_per_s = 180e6;  // compressed delta bytes per second
    double apply_bytes_per_s = 360e6;       // compressed delta bytes per second
    double hash_bytes_per_s = 17.5e9;       // reconstructed checkpoint bytes per second

    void validate() const {
        if (!(bandwidth_bps > 0.0) || !(decompress_bytes_per_s > 0.0) ||
            !(apply_bytes_per_s > 0.0) || !(hash_bytes_per_s > 0.0)) {
            throw ArgumentError("latency profile requires positive rates");
        }
    }
};

struct LatencyScenario {
    double anchor_bytes = 14e9;          // full checkpoint wire size
    double delta_bytes = 108e6;          // one delta wire size
    std::uint64_t slow_path_deltas = 9;  // chain length behind the recovery anchor

    void validate() const {
        if (!(anchor_bytes > 0.0) || !(delta_bytes > 0.0)) {
            throw ArgumentError("latency scenario requires positive object sizes");
        }
    }
};

struct PhaseBreakdown {
    double full_download = 0.0;
    double delta_download = 0.0;
    double decompression = 0.0;
    double application = 0.0;
    double hash_verification = 0.0;

    double total() const {
        return full_download + delta_download + decompression + application + hash_verification;
    }
};

struct SyncLatencyReport {
    PhaseBreakdown fast_path;   // one delta behind: single patch
    PhaseBreakdown slow_path;   // anchor plus the configured delta chain
    PhaseBreakdown cold_start;  // anchor only, no local state
};

namespace detail {

inline PhaseBreakdown latency_phases(const LatencyProfile& profile, const LatencyScenario& scenario,
                                     bool download_full, std::uint64_t delta_count) {
    PhaseBreakdown phases;
    if (download_full) {
        phases.full_download = scenario.anchor_bytes * 8.0 / profile.bandwidth_bps;
    }
    const double deltas = static_cast<double>(delta_count) * scenario.delta_bytes;
    phases.delta_download = deltas * 8.0 / profile.bandwidth_bps;
    phases.decompression = deltas / profile.decompress_bytes_per_s;
    phases.application = deltas / profile.apply_bytes_per_s;
    // The reconstructed checkpoint is hashed once at the end of the path,
    // whichever route produced it.
    phases.hash_verification = scenario.anchor_bytes / profile.hash_bytes_per_s;
    return phases;
}

}  // namespace detail

inline SyncLatencyReport model_sync_latency(const LatencyProfile& profile,
                                            const LatencyScenario& scenario) {
    profile.validate();
    scenario.validate();
    SyncLatencyReport report;
    report.fast_path = detail::latency_phases(profile, scenario, false, 1);
    report.slow_path = detail::latency_phases(profile, scenario, true, scenario.slow_path_deltas);
    report.cold_start = detail::latency_phases(profile, scenario, true, 0);
    return report;
}

inline nlohmann::json phase_breakdown_to_json(const PhaseBreakdown& phases) {
    return nlohmann::json{
        {"full_download", phases.full_download},         {"delta_download", phases.delta_download},
        {"decompression", phases.decompression},         {"application", phases.application},
        {"hash_verification", phases.hash_verification}, {"total", phases.total()},
    };
}

inline nlohmann::json latency_report_to_json(const SyncLatencyReport& report) {
    return nlohmann::json{
        {"fast_path", phase_breakdown_to_json(report.fast_path)},
        {"slow_path", phase_breakdown_to_json(report.slow_path)},
        {"cold_start", phase_breakdown_to_json(report.cold_start)},
    };
}

}  // namespace pulse
