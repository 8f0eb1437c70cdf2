// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pulse/absorption.hpp"
#include "pulse/bf16.hpp"
#include "pulse/checkpoint.hpp"
#include "pulse/error.hpp"

namespace pulse {

struct AdamConfig {
    double eta = 3e-6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
        if (!(0.0 < beta1 && beta1 < beta2 && beta2 < 1.0))
            throw ArgumentError("betas must satisfy 0 < beta1 < beta2 < 1");
        if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be non-negative");
    }
};

/// Supremum of the bias-corrected update ratio |m_hat| / sqrt(v_hat) after t
/// steps:
///
///   bound(t) = sqrt((1 - beta1) / (1 - beta2) * (1 - beta2^t) / (1 - beta1^t))
///
/// Pass t = infinity for the asymptote sqrt((1 - beta1) / (1 - beta2)). The
/// bound starts at exactly 1 for t = 1 and grows monotonically toward the
/// asymptote.
inline double adam_bound(const AdamConfig& cfg, double t) {
    cfg.validate();
    if (!(t >= 1.0)) throw ArgumentError("step count must be at least 1");
    const double base = (1.0 - cfg.beta1) / (1.0 - cfg.beta2);
    if (std::isinf(t)) return std::sqrt(base);
    const double correction = (1.0 - std::pow(cfg.beta2, t)) / (1.0 - std::pow(cfg.beta1, t));
    return std::sqrt(base * correction);
}

inline double adam_bound_asymptote(const AdamConfig& cfg) {
    return adam_bound(cfg, std::numeric_limits<double>::infinity());
}

enum class CriticalWeightMode {
    /// 256 * eta * bound(inf): below this magnitude the worst-case update
    /// still moves the stored weight.
    Theoretical,
    /// 256 * eta: observed updates cluster near ratio 1, so this is the
    /// magnitude where typical updates start being absorbed.
    Effective,
};

/// Weight magnitude at which an Adam update of eta * ratio equals the
/// absorption threshold |w| / 256.
inline double critical_weight(const AdamConfig& cfg, CriticalWeightMode mode) {
    cfg.validate();
    const double scale = 256.0 * cfg.eta;
    if (mode == CriticalWeightMode::Effective) return scale;
    return scale * adam_bound_asymptote(cfg);
}

struct RatioTrajectory {
    std::vector<double> ratios;  // ratio at steps 1..n
    double peak_value = 0.0;
    std::uint64_t peak_step = 0;  // 1-based step of the first maximum
    std::uint64_t phase_boundary = 0;

    /// Steps from the caller-marked phase boundary to the peak. The boundary
    /// is the last step of the preceding phase, so a peak at the first step
    /// of the new phase reports 1.
    std::int64_t peak_steps_after_boundary() const {
        return static_cast<std::int64_t>(peak_step) - static_cast<std::int64_t>(phase_boundary);
    }
};

/// Runs scalar Adam over the gradient sequence and records the
/// bias-corrected update ratio |m_hat| / (sqrt(v_hat) + epsilon) at every
/// step. `phase_boundary` is carried through to the report so the peak can
/// be located relative to a gradient-regime switch the caller knows about;
/// it does not affect the simulation.
inline RatioTrajectory simulate_adam_ratio(std::span<const double> gradients, const AdamConfig& cfg,
                                           std::uint64_t phase_boundary = 0) {
    cfg.validate();
    if (gradients.empty()) throw ArgumentError("gradient sequence is empty");
    if (phase_boundary > gradients.size())
        throw ArgumentError("phase boundary lies beyond the gradient sequence");

    RatioTrajectory out;
    out.phase_boundary = phase_boundary;
    out.ratios.reserve(gradients.size());

    double m = 0.0;
    double v = 0.0;
    double beta1_t = 1.0;
    double beta2_t = 1.0;
    for (std::size_t i = 0; i < gradients.size(); ++i) {
        const double g = gradients[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        beta1_t *= cfg.beta1;
        beta2_t *= cfg.beta2;
        const double m_hat = m / (1.0 - beta1_t);
        const double v_hat = v / (1.0 - beta2_t);
        const double ratio = std::abs(m_hat) / (std::sqrt(v_hat) + cfg.epsilon);
        out.ratios.push_back(ratio);
        if (ratio > out.peak_value) {
            out.peak_value = ratio;
            out.peak_step = i + 1;
        }
    }
    return out;
}

/// Gradient stream with a hard regime switch: `quiet_steps` of `quiet`
/// followed by `loud_steps` of `loud`. The quiet phase drives both moments
/// toward zero at different rates, so the switch produces a ratio spike
/// well above 1.
inline std::vector<double> regime_switch_gradients(std::size_t quiet_steps, double quiet,
                                                   std::size_t loud_steps, double loud) {
    std::vector<double> g(quiet_steps + loud_steps, quiet);
    std::fill(g.begin() + static_cast<std::ptrdiff_t>(quiet_steps), g.end(), loud);
    return g;
}

/// Per-element gradient source for update simulation: step is 1-based,
/// tensor indexes into the checkpoint's tensor list, element is the flat
/// row-major offset.
using GradientFn =
    std::function<double(std::uint64_t step, std::size_t tensor, std::uint64_t element)>;

enum class UpdateMode {
    /// The stored BF16 weight is rounded after every step, so updates below
    /// the absorption threshold vanish.
    PureBf16,
    /// A double-precision master copy accumulates updates; the BF16 weight
    /// is re-cast from the master each step, so small updates can build up
    /// and eventually cross a rounding boundary.
    Fp32Master,
};

struct UpdateSimulationResult {
    std::vector<SparsityReport> step_sparsity;  // BF16 weights, step i vs step i-1
    Checkpoint final;
};

/// Runs per-element Adam for `steps` steps starting from `weights` and
/// reports, for each step, how many BF16 weights actually moved.
inline UpdateSimulationResult simulate_absorbed_updates(const Checkpoint& weights,
                                                        const GradientFn& gradient,
                                                        const AdamConfig& cfg, std::uint64_t steps,
                                                        UpdateMode mode) {
    cfg.validate();
    weights.validate();
    if (weights.total_elements() == 0) throw ArgumentError("checkpoint has no elements");
    if (!gradient) throw ArgumentError("gradient function is empty");

    UpdateSimulationResult out;
    out.final = weights;

    std::vector<std::vector<double>> master(weights.tensors.size());
    std::vector<std::vector<double>> m(weights.tensors.size());
    std::vector<std::vector<double>> v(weights.tensors.size());
    for (std::size_t ti = 0; ti < weights.tensors.size(); ++ti) {
        const std::vector<Bf16>& data = weights.tensors[ti].data;
        master[ti].resize(data.size());
        for (std::size_t j = 0; j < data.size(); ++j) master[ti][j] = data[j].to_double();
        m[ti].assign(data.size(), 0.0);
        v[ti].assign(data.size(), 0.0);
    }

    double beta1_t = 1.0;
    double beta2_t = 1.0;
    for (std::uint64_t s = 1; s <= steps; ++s) {
        beta1_t *= cfg.beta1;
        beta2_t *= cfg.beta2;
        SparsityReport report;
        report.k = 1;
        for (std::size_t ti = 0; ti < weights.tensors.size(); ++ti) {
            std::vector<Bf16>& stored = out.final.tensors[ti].data;
            for (std::size_t j = 0; j < stored.size(); ++j) {
                const double g = gradient(s, ti, j);
                m[ti][j] = cfg.beta1 * m[ti][j] + (1.0 - cfg.beta1) * g;
                v[ti][j] = cfg.beta2 * v[ti][j] + (1.0 - cfg.beta2) * g * g;
                const double m_hat = m[ti][j] / (1.0 - beta1_t);
                const double v_hat = v[ti][j] / (1.0 - beta2_t);
                const double update = cfg.eta * m_hat / (std::sqrt(v_hat) + cfg.epsilon);

                const Bf16 before = stored[j];
                Bf16 after;
                if (mode == UpdateMode::PureBf16) {
                    after = round_to_bf16(before.to_double() - update);
                } else {
                    master[ti][j] -= update;
                    after = round_to_bf16(master[ti][j]);
                }
                if (after != before) ++report.changed;
                ++report.total;
                stored[j] = after;
            }
        }
        report.sparsity =
            1.0 - static_cast<double>(report.changed) / static_cast<double>(report.total);
        out.step_sparsity.push_back(report);
    }
    out.final.step = weights.step + steps;
    return out;
}

}  // namespace pulse
