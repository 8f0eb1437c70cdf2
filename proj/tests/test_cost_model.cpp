// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "pulse/cost_model.hpp"
#include "pulse/error.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using pulse::CodecId;
using pulse::CompressionProfile;
using pulse::LinkModel;

namespace {

constexpr double kBenchPayload = 194e6;

CompressionProfile table_profile(CodecId codec) {
    for (const CompressionProfile& profile : pulse::default_profiles()) {
        if (profile.codec == codec) return profile;
    }
    FAIL("no table profile for codec");
    return {};
}

}  // namespace

TEST_CASE("transfer time is encode + wire + decode") {
    const CompressionProfile profile{CodecId::Zstd1, 2.0, 100e6, 200e6};
    const LinkModel link{80e6, 10e6};
    // 10e6/100e6 + 10e6*8/(2*80e6) + 10e6/200e6 = 0.1 + 0.5 + 0.05
    CHECK_THAT(pulse::total_transfer_time(profile, link), WithinRel(0.65, 1e-12));
}

TEST_CASE("infinite compression leaves only codec overhead") {
    CompressionProfile profile{CodecId::Zstd1, 1e18, 100e6, 200e6};
    const LinkModel link{1.0, 10e6};
    CHECK_THAT(pulse::total_transfer_time(profile, link), WithinRel(0.15, 1e-6));
}

TEST_CASE("table zstd-1 profile at unbounded bandwidth costs 0.591 seconds") {
    const LinkModel link{1e30, kBenchPayload};
    CHECK_THAT(pulse::total_transfer_time(table_profile(CodecId::Zstd1), link),
               WithinAbs(0.5912629777, 1e-6));
}

TEST_CASE("a pass-through profile in the network-dominated regime halves with bandwidth") {
    const CompressionProfile raw{CodecId::Identity, 1.0, 1e30, 1e30};
    const LinkModel slow{100e6, 50e6};
    const LinkModel fast{200e6, 50e6};
    CHECK_THAT(pulse::total_transfer_time(raw, slow),
               WithinRel(2.0 * pulse::total_transfer_time(raw, fast), 1e-12));
}

TEST_CASE("transfer time strictly decreases in bandwidth and in ratio") {
    const CompressionProfile base{CodecId::Zstd1, 3.33, 534e6, 851e6};
    double previous = pulse::total_transfer_time(base, LinkModel{1e6, kBenchPayload});
    for (double bandwidth = 2e6; bandwidth <= 1e12; bandwidth *= 2.0) {
        const double current =
            pulse::total_transfer_time(base, LinkModel{bandwidth, kBenchPayload});
        CHECK(current < previous);
        previous = current;
    }

    const LinkModel link{100e6, kBenchPayload};
    CompressionProfile sweep = base;
    sweep.sparse_ratio = 1.0;
    previous = pulse::total_transfer_time(sweep, link);
    for (double ratio = 1.5; ratio <= 64.0; ratio *= 1.5) {
        sweep.sparse_ratio = ratio;
        const double current = pulse::total_transfer_time(sweep, link);
        CHECK(current < previous);
        previous = current;
    }
}

TEST_CASE("zstd-1 and lz4 trade places near 800 Mb/s") {
    const auto crossover = pulse::crossover_bandwidth(table_profile(CodecId::Zstd1),
                                                      table_profile(CodecId::Lz4), kBenchPayload);
    REQUIRE(crossover.has_value());
    CHECK_THAT(*crossover, WithinRel(796297978.5, 1e-6));
    CHECK_THAT(*crossover, WithinRel(800e6, 0.10));
}

TEST_CASE("zstd-3 and zstd-1 trade places near 14 Mb/s") {
    const auto crossover = pulse::crossover_bandwidth(table_profile(CodecId::Zstd3),
                                                      table_profile(CodecId::Zstd1), kBenchPayload);
    REQUIRE(crossover.has_value());
    CHECK_THAT(*crossover, WithinRel(14047764.62, 1e-6));
    CHECK_THAT(*crossover, WithinRel(14e6, 0.10));
}

TEST_CASE("crossover bandwidth is where the two totals meet") {
    const CodecId pairs[][2] = {
        {CodecId::Zstd1, CodecId::Lz4},
        {CodecId::Zstd3, CodecId::Zstd1},
    };
    for (const auto& pair : pairs) {
        const CompressionProfile a = table_profile(pair[0]);
        const CompressionProfile b = table_profile(pair[1]);
        const auto crossover = pulse::crossover_bandwidth(a, b, kBenchPayload);
        REQUIRE(crossover.has_value());
        const LinkModel link{*crossover, kBenchPayload};
        const double time_a = pulse::total_transfer_time(a, link);
        const double time_b = pulse::total_transfer_time(b, link);
        CHECK_THAT(time_a, WithinRel(time_b, 1e-9));
    }
}

TEST_CASE("crossover is symmetric in its arguments") {
    const auto forward = pulse::crossover_bandwidth(table_profile(CodecId::Zstd1),
                                                    table_profile(CodecId::Lz4), kBenchPayload);
    const auto backward = pulse::crossover_bandwidth(table_profile(CodecId::Lz4),
                                                     table_profile(CodecId::Zstd1), kBenchPayload);
    REQUIRE(forward.has_value());
    REQUIRE(backward.has_value());
    CHECK_THAT(*forward, WithinRel(*backward, 1e-12));
}

TEST_CASE("a dominated pairing has no crossover") {
    // gzip-6 compresses slightly worse than zstd-3 and costs far more codec
    // time, so zstd-3 wins at every positive bandwidth.
    const auto crossover = pulse::crossover_bandwidth(table_profile(CodecId::Zstd3),
                                                      table_profile(CodecId::Gzip6), kBenchPayload);
    CHECK_FALSE(crossover.has_value());
}

TEST_CASE("equal ratios with different overhead never cross") {
    const CompressionProfile quick{CodecId::Lz4, 3.0, 400e6, 800e6};
    const CompressionProfile slow{CodecId::Gzip6, 3.0, 40e6, 80e6};
    CHECK_FALSE(pulse::crossover_bandwidth(quick, slow, kBenchPayload).has_value());
}

TEST_CASE("equal overhead with different ratios never crosses") {
    const CompressionProfile tight{CodecId::Zstd3, 4.0, 100e6, 100e6};
    const CompressionProfile loose{CodecId::Lz4, 2.0, 100e6, 100e6};
    CHECK_FALSE(pulse::crossover_bandwidth(tight, loose, kBenchPayload).has_value());
}

TEST_CASE("indistinguishable profiles cannot be compared") {
    const CompressionProfile profile{CodecId::Zstd1, 3.33, 534e6, 851e6};
    CompressionProfile twin = profile;
    twin.codec = CodecId::Zstd3;
    CHECK_THROWS_AS(pulse::crossover_bandwidth(profile, twin, kBenchPayload), pulse::ArgumentError);
}

TEST_CASE("lz4 versus gzip-6 still crosses at a low positive rate") {
    const auto crossover = pulse::crossover_bandwidth(table_profile(CodecId::Lz4),
                                                      table_profile(CodecId::Gzip6), kBenchPayload);
    REQUIRE(crossover.has_value());
    CHECK_THAT(*crossover, WithinRel(12355760.25, 1e-6));
}

TEST_CASE("codec selection follows the published bandwidth tiers") {
    CHECK(pulse::select_codec(1e9) == CodecId::Lz4);
    CHECK(pulse::select_codec(100e6) == CodecId::Zstd1);
    CHECK(pulse::select_codec(5e6) == CodecId::Zstd3);

    // Boundaries belong to the middle tier.
    CHECK(pulse::select_codec(800e6) == CodecId::Zstd1);
    CHECK(pulse::select_codec(14e6) == CodecId::Zstd1);
    CHECK(pulse::select_codec(800e6 + 1.0) == CodecId::Lz4);
    CHECK(pulse::select_codec(14e6 - 1.0) == CodecId::Zstd3);

    CHECK_THROWS_AS(pulse::select_codec(0.0), pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::select_codec(-5e6), pulse::ArgumentError);
}

TEST_CASE("selection agrees with pairwise totals inside each regime") {
    const CompressionProfile contenders[] = {
        table_profile(CodecId::Lz4),
        table_profile(CodecId::Zstd1),
        table_profile(CodecId::Zstd3),
    };
    for (double bandwidth : {2e9, 100e6, 5e6}) {
        const CodecId selected = pulse::select_codec(bandwidth);
        const LinkModel link{bandwidth, kBenchPayload};
        double selected_time = 0.0;
        for (const CompressionProfile& profile : contenders) {
            if (profile.codec == selected) {
                selected_time = pulse::total_transfer_time(profile, link);
            }
        }
        for (const CompressionProfile& profile : contenders) {
            CHECK(selected_time <= pulse::total_transfer_time(profile, link));
        }
    }
}

TEST_CASE("derived regime boundaries land near the published tiers") {
    const auto profiles = pulse::default_profiles();
    const pulse::RegimeBoundaries derived =
        pulse::derive_regime_boundaries(profiles, kBenchPayload);
    CHECK_THAT(derived.low_bps, WithinRel(14e6, 0.10));
    CHECK_THAT(derived.high_bps, WithinRel(800e6, 0.10));

    // Selection with derived boundaries still gives the tier answers.
    CHECK(pulse::select_codec(1e9, derived) == CodecId::Lz4);
    CHECK(pulse::select_codec(100e6, derived) == CodecId::Zstd1);
    CHECK(pulse::select_codec(5e6, derived) == CodecId::Zstd3);

    std::vector<CompressionProfile> missing = {table_profile(CodecId::Zstd1),
                                               table_profile(CodecId::Lz4)};
    CHECK_THROWS_AS(pulse::derive_regime_boundaries(missing, kBenchPayload), pulse::ArgumentError);
}

TEST_CASE("zstd-1 never loses to gzip-6 at any bandwidth") {
    const CompressionProfile zstd1 = table_profile(CodecId::Zstd1);
    const CompressionProfile gzip6 = table_profile(CodecId::Gzip6);
    for (double bandwidth = 1e3; bandwidth <= 1e12; bandwidth *= 3.0) {
        const LinkModel link{bandwidth, kBenchPayload};
        CHECK(pulse::total_transfer_time(zstd1, link) <= pulse::total_transfer_time(gzip6, link));
    }
}

TEST_CASE("utilization reproduces the 90% synchronization corner") {
    CHECK_THAT(pulse::utilization(50.0, 14e9, 20.16e9), WithinAbs(0.900, 0.005));
    CHECK_THAT(pulse::utilization(50.0, 140e6, 0.2016e9), WithinAbs(0.900, 0.005));
}

TEST_CASE("utilization limits and argument checks") {
    CHECK_THAT(pulse::utilization(50.0, 14e9, 1e30), WithinAbs(1.0, 1e-9));
    CHECK(pulse::utilization(50.0, 0.0, 1e6) == 1.0);
    CHECK_THROWS_AS(pulse::utilization(0.0, 14e9, 1e9), pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::utilization(50.0, 14e9, 0.0), pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::utilization(50.0, -1.0, 1e9), pulse::ArgumentError);
}

TEST_CASE("utilization strictly increases with bandwidth") {
    double previous = pulse::utilization(50.0, 14e9, 1e6);
    for (double bandwidth = 2e6; bandwidth <= 1e13; bandwidth *= 2.0) {
        const double current = pulse::utilization(50.0, 14e9, bandwidth);
        CHECK(current > previous);
        previous = current;
    }
}

TEST_CASE("utilization curve reproduces the four-point sweep") {
    const double grid[] = {0.1e9, 1e9, 10e9, 100e9};
    const auto curve = pulse::utilization_curve(50.0, 14e9, grid);
    REQUIRE(curve.size() == 4);
    CHECK_THAT(curve[0].second, WithinAbs(0.043, 5e-4));
    CHECK_THAT(curve[1].second, WithinAbs(0.309, 5e-4));
    CHECK_THAT(curve[2].second, WithinAbs(0.817, 5e-4));
    CHECK_THAT(curve[3].second, WithinAbs(0.978, 5e-4));

    // A hundredfold smaller payload dominates at every grid point.
    const auto small = pulse::utilization_curve(50.0, 140e6, grid);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(small[i].second > curve[i].second);
    }

    const auto flat = pulse::utilization_curve(50.0, 0.0, grid);
    for (const auto& [bandwidth, fraction] : flat) {
        CHECK(fraction == 1.0);
    }

    CHECK_THROWS_AS(pulse::utilization_curve(50.0, 14e9, {}), pulse::ArgumentError);
}

TEST_CASE("utilization curve serializes to CSV") {
    const double grid[] = {0.1e9, 1e9};
    const auto curve = pulse::utilization_curve(50.0, 14e9, grid);
    const std::string csv = pulse::utilization_curve_csv(curve);

    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "bandwidth_bps,utilization");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        CHECK(line.find(',') != std::string::npos);
        ++rows;
    }
    CHECK(rows == 2);
}

TEST_CASE("plan report picks the cheapest codec and lists ladder crossovers") {
    const auto profiles = pulse::default_profiles();
    const LinkModel link{100e6, kBenchPayload};
    const pulse::PlanReport report = pulse::plan_transfer(profiles, link);

    REQUIRE(report.totals.size() == profiles.size());
    CHECK(report.chosen == CodecId::Zstd1);
    double best = report.totals.front().total_seconds;
    for (const pulse::CodecPlan& plan : report.totals) {
        best = std::min(best, plan.total_seconds);
        if (plan.codec == report.chosen) {
            CHECK_THAT(
                plan.total_seconds,
                WithinRel(pulse::total_transfer_time(table_profile(plan.codec), link), 1e-12));
        }
    }
    for (const pulse::CodecPlan& plan : report.totals) {
        if (plan.codec == report.chosen) {
            CHECK(plan.total_seconds == best);
        }
    }

    REQUIRE(report.crossovers.size() == 3);
    CHECK(report.crossovers[0].faster_overhead == CodecId::Lz4);
    CHECK(report.crossovers[0].slower_overhead == CodecId::Zstd1);
    REQUIRE(report.crossovers[0].bandwidth_bps.has_value());
    CHECK_THAT(*report.crossovers[0].bandwidth_bps, WithinRel(796297978.5, 1e-6));
    CHECK(report.crossovers[1].faster_overhead == CodecId::Zstd1);
    CHECK(report.crossovers[1].slower_overhead == CodecId::Zstd3);
    REQUIRE(report.crossovers[1].bandwidth_bps.has_value());
    CHECK_THAT(*report.crossovers[1].bandwidth_bps, WithinRel(14047764.62, 1e-6));
    CHECK(report.crossovers[2].faster_overhead == CodecId::Zstd3);
    CHECK(report.crossovers[2].slower_overhead == CodecId::Gzip6);
    CHECK_FALSE(report.crossovers[2].bandwidth_bps.has_value());
}

TEST_CASE("plan chosen codec tracks the regime at interior points") {
    const auto profiles = pulse::default_profiles();
    CHECK(pulse::plan_transfer(profiles, {2e9, kBenchPayload}).chosen == CodecId::Lz4);
    CHECK(pulse::plan_transfer(profiles, {100e6, kBenchPayload}).chosen == CodecId::Zstd1);
    CHECK(pulse::plan_transfer(profiles, {5e6, kBenchPayload}).chosen == CodecId::Zstd3);
}

TEST_CASE("plan report serializes to CSV and JSON") {
    const pulse::PlanReport report =
        pulse::plan_transfer(pulse::default_profiles(), {100e6, kBenchPayload});

    const std::string csv = pulse::plan_report_csv(report);
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "codec,total_seconds");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 4);

    const nlohmann::json doc = pulse::plan_report_to_json(report);
    CHECK(doc.at("chosen").get<std::string>() == "zstd-1");
    CHECK(doc.at("bandwidth_bps").get<double>() == 100e6);
    CHECK(doc.at("payload_bytes").get<double>() == kBenchPayload);
    REQUIRE(doc.at("totals").size() == 4);
    REQUIRE(doc.at("crossovers").size() == 3);
    CHECK(doc.at("crossovers")[2].at("bandwidth_bps").is_null());
    CHECK(doc.at("crossovers")[0].at("bandwidth_bps").get<double>() > 700e6);
}

TEST_CASE("profile and link validation rejects non-positive values") {
    CHECK_THROWS_AS(pulse::total_transfer_time({CodecId::Lz4, 0.0, 1e6, 1e6}, {1e6, 1e6}),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::total_transfer_time({CodecId::Lz4, 2.0, 0.0, 1e6}, {1e6, 1e6}),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::total_transfer_time({CodecId::Lz4, 2.0, 1e6, 0.0}, {1e6, 1e6}),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::total_transfer_time({CodecId::Lz4, 2.0, 1e6, 1e6}, {0.0, 1e6}),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::total_transfer_time({CodecId::Lz4, 2.0, 1e6, 1e6}, {1e6, 0.0}),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::plan_transfer({}, {1e6, 1e6}), pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::crossover_bandwidth({CodecId::Lz4, 2.0, 1e6, 1e6},
                                               {CodecId::Zstd1, 3.0, 1e6, 1e6}, 0.0),
                    pulse::ArgumentError);
    CHECK_THROWS_AS(pulse::select_codec(1e9, {800e6, 14e6}), pulse::ArgumentError);
}

TEST_CASE("profiles can be built from measured compression reports") {
    pulse::CompressionReport report;
    report.sparse_ratio = 2.5;
    report.encode_bps = 120e6;
    report.decode_bps = 240e6;
    const CompressionProfile profile = pulse::profile_from_report(CodecId::Lz4, report);
    CHECK(profile.codec == CodecId::Lz4);
    CHECK(profile.sparse_ratio == 2.5);

    pulse::CompressionReport empty;
    CHECK_THROWS_AS(pulse::profile_from_report(CodecId::Lz4, empty), pulse::ArgumentError);
}
