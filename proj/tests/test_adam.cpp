// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "pulse/adam_analysis.hpp"
#include "pulse/synthetic.hpp"

using namespace pulse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AdamConfig config(double beta1, double beta2, double eta = 3e-6) {
    AdamConfig cfg;
    cfg.eta = eta;
    cfg.beta1 = beta1;
    cfg.beta2 = beta2;
    return cfg;
}

Checkpoint uniform_checkpoint(double value, std::int64_t n) {
    Checkpoint c;
    c.step = 0;
    TensorRecord t;
    t.name = "w";
    t.shape = {n};
    t.data.assign(static_cast<std::size_t>(n), round_to_bf16(value));
    c.tensors.push_back(std::move(t));
    return c;
}

}  // namespace

TEST_CASE("update ratio bound asymptotes") {
    CHECK(adam_bound(config(0.9, 0.999), kInf) == Catch::Approx(10.0).margin(1e-3));
    CHECK(adam_bound(config(0.9, 0.95), kInf) == Catch::Approx(std::sqrt(2.0)).margin(1e-3));
    CHECK(adam_bound(config(0.9, 0.99), kInf) == Catch::Approx(std::sqrt(10.0)).margin(1e-3));
    CHECK(adam_bound_asymptote(config(0.9, 0.999)) == adam_bound(config(0.9, 0.999), kInf));
}

TEST_CASE("update ratio bound starts at one and grows toward the asymptote") {
    for (const AdamConfig& cfg : {config(0.9, 0.999), config(0.9, 0.95), config(0.5, 0.9)}) {
        CHECK(adam_bound(cfg, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
        const double limit = adam_bound_asymptote(cfg);
        double previous = 0.0;
        for (int t = 1; t <= 400; ++t) {
            const double b = adam_bound(cfg, static_cast<double>(t));
            CHECK(b >= previous - 1e-12);
            CHECK(b <= limit + 1e-12);
            previous = b;
        }
        CHECK(adam_bound(cfg, 1e6) == Catch::Approx(limit).epsilon(1e-9));
    }
}

TEST_CASE("update ratio bound validates its inputs") {
    CHECK_THROWS_AS(adam_bound(config(0.9, 0.999), 0.0), ArgumentError);
    CHECK_THROWS_AS(adam_bound(config(0.9, 0.999), 0.5), ArgumentError);
    CHECK_THROWS_AS(adam_bound(config(0.999, 0.9), 10.0), ArgumentError);
    CHECK_THROWS_AS(adam_bound(config(0.9, 0.9), 10.0), ArgumentError);
    CHECK_THROWS_AS(adam_bound(config(0.0, 0.999), 10.0), ArgumentError);
    CHECK_THROWS_AS(adam_bound(config(0.9, 1.0), 10.0), ArgumentError);
}

TEST_CASE("critical weight magnitudes") {
    const AdamConfig cfg = config(0.9, 0.999);
    CHECK(critical_weight(cfg, CriticalWeightMode::Effective) ==
          Catch::Approx(7.68e-4).epsilon(1e-9));
    CHECK(critical_weight(cfg, CriticalWeightMode::Theoretical) ==
          Catch::Approx(7.68e-3).epsilon(1e-9));

    const AdamConfig wide = config(0.9, 0.95);
    CHECK(critical_weight(wide, CriticalWeightMode::Theoretical) ==
          Catch::Approx(256.0 * 3e-6 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(critical_weight(wide, CriticalWeightMode::Theoretical) ==
          Catch::Approx(1.086e-3).epsilon(1e-3));

    // The critical weight scales linearly with the step size.
    CHECK(critical_weight(config(0.9, 0.999, 6e-6), CriticalWeightMode::Effective) ==
          Catch::Approx(2.0 * 7.68e-4).epsilon(1e-9));
    CHECK_THROWS_AS(critical_weight(config(0.9, 0.999, 0.0), CriticalWeightMode::Effective),
                    ArgumentError);
}

TEST_CASE("constant gradients drive the update ratio to one") {
    const std::vector<double> g(100, 0.5);
    const RatioTrajectory traj = simulate_adam_ratio(g, config(0.9, 0.999));
    REQUIRE(traj.ratios.size() == 100);
    for (double r : traj.ratios) CHECK(r == Catch::Approx(1.0).margin(1e-6));
    CHECK(traj.peak_value == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("regime switch after a long quiet phase spikes the update ratio") {
    const std::vector<double> g = regime_switch_gradients(100'000, 1e-20, 50, 1.0);
    REQUIRE(g.size() == 100'050);
    const RatioTrajectory traj = simulate_adam_ratio(g, config(0.9, 0.999), 100'000);

    // Quiet-phase ratios are tiny: epsilon dominates sqrt(v_hat) = 1e-20.
    CHECK(traj.ratios[50'000] < 1e-6);

    CHECK(traj.peak_value == Catch::Approx(6.57).margin(0.05));
    CHECK(traj.peak_value == Catch::Approx(6.5686).margin(1e-3));
    CHECK(traj.peak_steps_after_boundary() >= 11);
    CHECK(traj.peak_steps_after_boundary() <= 13);

    // After the peak the ratio decays back toward 1 as v_hat catches up.
    CHECK(traj.ratios.back() < traj.peak_value);
}

TEST_CASE("update ratio never exceeds the step bound") {
    const AdamConfig cfg = config(0.9, 0.999);

    std::mt19937_64 rng(13);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> g(500);
    for (auto& x : g) x = noise(rng);
    const RatioTrajectory random_traj = simulate_adam_ratio(g, cfg);
    for (std::size_t i = 0; i < random_traj.ratios.size(); ++i)
        REQUIRE(random_traj.ratios[i] <= adam_bound(cfg, static_cast<double>(i + 1)) + 1e-12);

    const std::vector<double> adversarial = regime_switch_gradients(2'000, 1e-20, 50, 1.0);
    const RatioTrajectory spike_traj = simulate_adam_ratio(adversarial, cfg, 2'000);
    for (std::size_t i = 0; i < spike_traj.ratios.size(); ++i)
        REQUIRE(spike_traj.ratios[i] <= adam_bound(cfg, static_cast<double>(i + 1)) + 1e-12);
    CHECK(spike_traj.peak_value < adam_bound_asymptote(cfg));
}

TEST_CASE("ratio simulation validates its inputs") {
    CHECK_THROWS_AS(simulate_adam_ratio({}, config(0.9, 0.999)), ArgumentError);
    const std::vector<double> g(10, 1.0);
    CHECK_THROWS_AS(simulate_adam_ratio(g, config(0.9, 0.999), 11), ArgumentError);
    CHECK_THROWS_AS(simulate_adam_ratio(g, config(0.999, 0.9)), ArgumentError);
}

TEST_CASE("updates far below the absorption threshold leave weights frozen") {
    const Checkpoint start = uniform_checkpoint(0.1, 16);
    const auto unit = [](std::uint64_t, std::size_t, std::uint64_t) { return 1.0; };
    const UpdateSimulationResult r =
        simulate_absorbed_updates(start, unit, config(0.9, 0.999), 10, UpdateMode::PureBf16);

    REQUIRE(r.step_sparsity.size() == 10);
    for (const SparsityReport& s : r.step_sparsity) {
        CHECK(s.changed == 0);
        CHECK(s.total == 16);
        CHECK(s.sparsity == 1.0);
    }
    CHECK(r.final.step == 10);
    CHECK(r.final.tensors[0].data == start.tensors[0].data);
}

TEST_CASE("updates above the absorption threshold move weights immediately") {
    // |w| = 1e-5 puts half the BF16 gap near 3e-8, far below the 3e-6 step.
    const Checkpoint start = uniform_checkpoint(1e-5, 8);
    const auto unit = [](std::uint64_t, std::size_t, std::uint64_t) { return 1.0; };
    const UpdateSimulationResult r =
        simulate_absorbed_updates(start, unit, config(0.9, 0.999), 3, UpdateMode::PureBf16);
    CHECK(r.step_sparsity[0].changed == 8);
    CHECK(r.final.tensors[0].data[0] != start.tensors[0].data[0]);
}

TEST_CASE("fp32 master accumulates updates that pure bf16 absorbs forever") {
    const Checkpoint start = uniform_checkpoint(0.1, 4);
    const auto unit = [](std::uint64_t, std::size_t, std::uint64_t) { return 1.0; };
    const AdamConfig cfg = config(0.9, 0.999);

    const UpdateSimulationResult pure =
        simulate_absorbed_updates(start, unit, cfg, 200, UpdateMode::PureBf16);
    for (const SparsityReport& s : pure.step_sparsity) CHECK(s.changed == 0);
    CHECK(pure.final.tensors[0].data == start.tensors[0].data);

    const UpdateSimulationResult master =
        simulate_absorbed_updates(start, unit, cfg, 200, UpdateMode::Fp32Master);
    std::size_t first_change = 0;
    for (std::size_t i = 0; i < master.step_sparsity.size(); ++i) {
        if (master.step_sparsity[i].changed > 0) {
            first_change = i + 1;
            break;
        }
    }
    // The ~3e-6 per-step drift crosses the 2^-12 rounding boundary at 0.1
    // after roughly 80 steps.
    REQUIRE(first_change > 0);
    CHECK(first_change > 50);
    CHECK(first_change < 120);
    CHECK(master.final.tensors[0].data != start.tensors[0].data);
}

TEST_CASE("gradient callback addresses tensors and elements correctly") {
    Checkpoint start;
    start.step = 7;
    start.tensors.push_back({"a", {3}, std::vector<Bf16>(3, round_to_bf16(1e-5))});
    start.tensors.push_back({"b", {2, 2}, std::vector<Bf16>(4, round_to_bf16(1e-5))});

    const auto targeted = [](std::uint64_t, std::size_t tensor, std::uint64_t element) {
        return (tensor == 1 && element == 2) ? 1.0 : 0.0;
    };
    const UpdateSimulationResult r =
        simulate_absorbed_updates(start, targeted, config(0.9, 0.999), 2, UpdateMode::PureBf16);

    CHECK(r.final.step == 9);
    for (const SparsityReport& s : r.step_sparsity) {
        CHECK(s.total == 7);
        CHECK(s.changed == 1);
    }
    CHECK(r.final.tensors[0].data == start.tensors[0].data);
    CHECK(r.final.tensors[1].data[2] != start.tensors[1].data[2]);
    CHECK(r.final.tensors[1].data[0] == start.tensors[1].data[0]);
}

TEST_CASE("update simulation validates its inputs") {
    const auto unit = [](std::uint64_t, std::size_t, std::uint64_t) { return 1.0; };
    Checkpoint empty;
    CHECK_THROWS_AS(
        simulate_absorbed_updates(empty, unit, config(0.9, 0.999), 1, UpdateMode::PureBf16),
        ArgumentError);
    const Checkpoint start = uniform_checkpoint(0.1, 2);
    CHECK_THROWS_AS(
        simulate_absorbed_updates(start, GradientFn{}, config(0.9, 0.999), 1, UpdateMode::PureBf16),
        ArgumentError);
    CHECK_THROWS_AS(
        simulate_absorbed_updates(start, unit, config(0.999, 0.9), 1, UpdateMode::PureBf16),
        ArgumentError);
}
