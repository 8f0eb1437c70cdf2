// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pulse/compression.hpp"
#include "pulse/error.hpp"
#include "pulse/metrics.hpp"

namespace pulse {

// Measured characteristics of one codec: how much it shrinks the raw sparse
// payload and how fast it moves bytes through the encoder/decoder.
struct CompressionProfile {
    CodecId codec = CodecId::Identity;
    double sparse_ratio = 1.0;  // raw payload bytes / wire bytes
    double encode_bps = 0.0;    // raw payload bytes per second of compression
    double decode_bps = 0.0;    // raw payload bytes per second of decompression

    void validate() const {
        if (!(sparse_ratio > 0.0) || !(encode_bps > 0.0) || !(decode_bps > 0.0)) {
            throw ArgumentError("compression profile requires positive ratio and throughputs");
        }
    }
};

struct LinkModel {
    double bandwidth_bps = 0.0;  // bits per second
    double payload_bytes = 0.0;  // uncompressed sparse payload

    void validate() const {
        if (!(bandwidth_bps > 0.0) || !(payload_bytes > 0.0)) {
            throw ArgumentError("link model requires positive bandwidth and payload");
        }
    }
};

inline CompressionProfile profile_from_report(CodecId codec, const CompressionReport& report) {
    CompressionProfile profile{codec, report.sparse_ratio, report.encode_bps, report.decode_bps};
    profile.validate();
    return profile;
}

// Published benchmark profiles for the codecs this library ships.  They are
// configuration data, not measurements of this machine; replace them with
// profile_from_report() output when local numbers matter.
inline std::vector<CompressionProfile> default_profiles() {
    return {
        {CodecId::Lz4, 2.40, 830e6, 1484e6},
        {CodecId::Zstd1, 3.33, 534e6, 851e6},
        {CodecId::Zstd3, 3.40, 197e6, 670e6},
        {CodecId::Gzip6, 3.32, 14e6, 192e6},
    };
}

namespace detail {

// Encode + decode seconds: the bandwidth-independent part of the total.
inline double codec_overhead_seconds(const CompressionProfile& profile, double payload_bytes) {
    return payload_bytes / profile.encode_bps + payload_bytes / profile.decode_bps;
}

}  // namespace detail

inline double total_transfer_time(const CompressionProfile& profile, const LinkModel& link) {
    profile.validate();
    link.validate();
    const double wire_seconds =
        link.payload_bytes * 8.0 / (profile.sparse_ratio * link.bandwidth_bps);
    return detail::codec_overhead_seconds(profile, link.payload_bytes) + wire_seconds;
}

// Bandwidth at which the two profiles' total transfer times are equal.  Empty
// when one profile is at least as fast at every bandwidth (the curves never
// cross at a positive rate).
inline std::optional<double> crossover_bandwidth(const CompressionProfile& a,
                                                 const CompressionProfile& b,
                                                 double payload_bytes) {
    a.validate();
    b.validate();
    if (!(payload_bytes > 0.0)) {
        throw ArgumentError("crossover payload must be positive");
    }
    const double wire_gap = payload_bytes * 8.0 * (1.0 / a.sparse_ratio - 1.0 / b.sparse_ratio);
    const double overhead_gap = detail::codec_overhead_seconds(b, payload_bytes) -
                                detail::codec_overhead_seconds(a, payload_bytes);
    if (wire_gap == 0.0 && overhead_gap == 0.0) {
        throw ArgumentError("profiles have identical ratio and overhead; no distinct crossover");
    }
    if (wire_gap == 0.0 || overhead_gap == 0.0) {
        return std::nullopt;
    }
    const double bandwidth = wire_gap / overhead_gap;
    if (!(bandwidth > 0.0)) {
        return std::nullopt;
    }
    return bandwidth;
}

// Bandwidth tiers for codec selection.  The published boundaries are round
// numbers; derive_regime_boundaries() recomputes them from profiles.
struct RegimeBoundaries {
    double low_bps = 14e6;    // below: favor ratio
    double high_bps = 800e6;  // above: favor encoder speed

    void validate() const {
        if (!(low_bps > 0.0) || !(high_bps > low_bps)) {
            throw ArgumentError("regime boundaries must satisfy 0 < low < high");
        }
    }
};

inline CodecId select_codec(double bandwidth_bps, const RegimeBoundaries& boundaries = {}) {
    boundaries.validate();
    if (!(bandwidth_bps > 0.0)) {
        throw ArgumentError("bandwidth must be positive");
    }
    if (bandwidth_bps > boundaries.high_bps) {
        return CodecId::Lz4;
    }
    if (bandwidth_bps < boundaries.low_bps) {
        return CodecId::Zstd3;
    }
    return CodecId::Zstd1;
}

inline RegimeBoundaries derive_regime_boundaries(std::span<const CompressionProfile> profiles,
                                                 double payload_bytes) {
    const CompressionProfile* by_codec[3] = {nullptr, nullptr, nullptr};
    for (const CompressionProfile& profile : profiles) {
        if (profile.codec == CodecId::Zstd3) by_codec[0] = &profile;
        if (profile.codec == CodecId::Zstd1) by_codec[1] = &profile;
        if (profile.codec == CodecId::Lz4) by_codec[2] = &profile;
    }
    if (!by_codec[0] || !by_codec[1] || !by_codec[2]) {
        throw ArgumentError("deriving regime boundaries needs zstd-3, zstd-1, and lz4 profiles");
    }
    const std::optional<double> low =
        crossover_bandwidth(*by_codec[0], *by_codec[1], payload_bytes);
    const std::optional<double> high =
        crossover_bandwidth(*by_codec[1], *by_codec[2], payload_bytes);
    if (!low || !high) {
        throw ArgumentError("profiles do not produce two positive crossover bandwidths");
    }
    RegimeBoundaries boundaries{*low, *high};
    boundaries.validate();
    return boundaries;
}

inline double utilization(double compute_seconds, double payload_bytes, double bandwidth_bps) {
    if (!(compute_seconds > 0.0) || !(bandwidth_bps > 0.0) || payload_bytes < 0.0) {
        throw ArgumentError("utilization requires positive compute and bandwidth");
    }
    return compute_seconds / (compute_seconds + payload_bytes * 8.0 / bandwidth_bps);
}

inline std::vector<std::pair<double, double>> utilization_curve(double compute_seconds,
                                                                double payload_bytes,
                                                                std::span<const double> grid) {
    if (grid.empty()) {
        throw ArgumentError("utilization curve needs at least one bandwidth point");
    }
    std::vector<std::pair<double, double>> curve;
    curve.reserve(grid.size());
    for (double bandwidth_bps : grid) {
        curve.emplace_back(bandwidth_bps,
                           utilization(compute_seconds, payload_bytes, bandwidth_bps));
    }
    return curve;
}

struct CodecPlan {
    CodecId codec = CodecId::Identity;
    double total_seconds = 0.0;
};

// Crossover between two profiles adjacent on the overhead ladder; empty
// bandwidth means the pair never trades places at a positive rate.
struct CodecCrossover {
    CodecId faster_overhead = CodecId::Identity;  // preferred at high bandwidth
    CodecId slower_overhead = CodecId::Identity;  // preferred at low bandwidth
    std::optional<double> bandwidth_bps;
};

struct PlanReport {
    LinkModel link;
    std::vector<CodecPlan> totals;  // input profile order
    CodecId chosen = CodecId::Identity;
    std::vector<CodecCrossover> crossovers;  // ladder order, high bandwidth first
};

inline PlanReport plan_transfer(std::span<const CompressionProfile> profiles,
                                const LinkModel& link) {
    if (profiles.empty()) {
        throw ArgumentError("planning needs at least one compression profile");
    }
    link.validate();

    PlanReport report;
    report.link = link;
    report.totals.reserve(profiles.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const double total = total_transfer_time(profiles[i], link);
        report.totals.push_back({profiles[i].codec, total});
        if (total < report.totals[best].total_seconds) {
            best = i;
        }
    }
    report.chosen = report.totals[best].codec;

    // Walk the profiles from cheapest to most expensive codec overhead; each
    // adjacent pair is a rung where falling bandwidth can flip the winner.
    std::vector<std::size_t> ladder(profiles.size());
    for (std::size_t i = 0; i < ladder.size(); ++i) ladder[i] = i;
    std::sort(ladder.begin(), ladder.end(), [&](std::size_t lhs, std::size_t rhs) {
        return detail::codec_overhead_seconds(profiles[lhs], link.payload_bytes) <
               detail::codec_overhead_seconds(profiles[rhs], link.payload_bytes);
    });
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
        const CompressionProfile& fast = profiles[ladder[i]];
        const CompressionProfile& slow = profiles[ladder[i + 1]];
        CodecCrossover crossover{fast.codec, slow.codec, std::nullopt};
        crossover.bandwidth_bps = crossover_bandwidth(fast, slow, link.payload_bytes);
        report.crossovers.push_back(crossover);
    }
    return report;
}

namespace detail {

inline std::string format_double(double value) {
    std::ostringstream out;
    out.precision(12);
    out << value;
    return out.str();
}

}  // namespace detail

inline std::string utilization_curve_csv(std::span<const std::pair<double, double>> curve) {
    std::string csv = "bandwidth_bps,utilization\n";
    for (const auto& [bandwidth_bps, fraction] : curve) {
        csv += detail::format_double(bandwidth_bps);
        csv += ',';
        csv += detail::format_double(fraction);
        csv += '\n';
    }
    return csv;
}

inline std::string plan_report_csv(const PlanReport& report) {
    std::string csv = "codec,total_seconds\n";
    for (const CodecPlan& plan : report.totals) {
        csv += codec_name(plan.codec);
        csv += ',';
        csv += detail::format_double(plan.total_seconds);
        csv += '\n';
    }
    return csv;
}

inline nlohmann::json plan_report_to_json(const PlanReport& report) {
    nlohmann::json totals = nlohmann::json::array();
    for (const CodecPlan& plan : report.totals) {
        totals.push_back(
            {{"codec", codec_name(plan.codec)}, {"total_seconds", plan.total_seconds}});
    }
    nlohmann::json crossovers = nlohmann::json::array();
    for (const CodecCrossover& crossover : report.crossovers) {
        nlohmann::json entry = {
            {"faster_overhead", codec_name(crossover.faster_overhead)},
            {"slower_overhead", codec_name(crossover.slower_overhead)},
        };
        if (crossover.bandwidth_bps) {
            entry["bandwidth_bps"] = *crossover.bandwidth_bps;
        } else {
            entry["bandwidth_bps"] = nullptr;
        }
        crossovers.push_back(entry);
    }
    return nlohmann::json{
        {"bandwidth_bps", report.link.bandwidth_bps},
        {"payload_bytes", report.link.payload_bytes},
        {"totals", totals},
        {"chosen", codec_name(report.chosen)},
        {"crossovers", crossovers},
    };
}

}  // namespace pulse
