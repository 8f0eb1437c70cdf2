// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pulse/checkpoint.hpp"
#include "pulse/error.hpp"

namespace pulse {

/// Parameters for synthetic checkpoint pairs. Base weights are drawn
/// sign-symmetric log-normal so magnitude statistics resemble trained
/// weights; changed positions cluster inside windows of consecutive flat
/// positions to mimic the spatial locality of real updates, with irregular
/// within-window gaps as observed in practice.
struct SyntheticSpec {
    std::vector<std::vector<std::int64_t>> shapes;
    double sparsity = 0.99;           // target fraction of bitwise-identical elements
    std::int64_t cluster_width = 64;  // window of consecutive positions per change cluster
    std::uint64_t seed = 0;
    double median_magnitude = 0.0117;
    double sigma = 1.0;  // log-normal shape parameter
};

inline Checkpoint generate_base_checkpoint(const SyntheticSpec& spec) {
    if (spec.shapes.empty()) throw ArgumentError("synthetic spec has no tensor shapes");
    if (!(spec.sparsity >= 0.0 && spec.sparsity <= 1.0))
        throw ArgumentError("target sparsity must lie in [0, 1]");
    if (spec.cluster_width < 1) throw ArgumentError("cluster width must be positive");

    std::mt19937_64 rng(spec.seed);
    std::lognormal_distribution<double> mag(std::log(spec.median_magnitude), spec.sigma);
    std::bernoulli_distribution negative(0.5);

    Checkpoint c;
    c.step = 0;
    for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
        TensorRecord t;
        t.name = "tensor_" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        t.shape = spec.shapes[i];
        t.data.resize(t.numel());
        for (auto& v : t.data) {
            double x = mag(rng);
            if (negative(rng)) x = -x;
            v = round_to_bf16(x);
        }
        c.tensors.push_back(std::move(t));
    }
    c.validate();
    return c;
}

/// Returns a copy of `base` at `new_step` in which a clustered subset of
/// elements differs bitwise; the count of changed elements is
/// round((1 - sparsity) * d), so measured sparsity matches the target
/// within 1/d.
inline Checkpoint mutate_checkpoint(const Checkpoint& base, double sparsity,
                                    std::int64_t cluster_width, std::uint64_t seed,
                                    std::uint64_t new_step) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0))
        throw ArgumentError("target sparsity must lie in [0, 1]");
    if (cluster_width < 1) throw ArgumentError("cluster width must be positive");

    Checkpoint next = base;
    next.step = new_step;
    const std::uint64_t d = base.total_elements();
    if (d == 0) return next;
    const auto n_change =
        static_cast<std::uint64_t>(std::llround((1.0 - sparsity) * static_cast<double>(d)));
    if (n_change == 0) return next;

    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_int_distribution<std::uint64_t> start_dist(0, d - 1);
    std::bernoulli_distribution in_cluster(0.5);
    std::vector<bool> changed(d, false);
    std::uint64_t marked = 0;
    while (marked < n_change) {
        const std::uint64_t start = start_dist(rng);
        for (std::int64_t j = 0; j < cluster_width && marked < n_change; ++j) {
            const std::uint64_t pos = start + static_cast<std::uint64_t>(j);
            if (pos >= d) break;
            // Half-density windows leave irregular gaps between changes, as
            // real updates do; all-consecutive runs would give the index
            // coder an artificially easy stream.
            if ((n_change == d || in_cluster(rng)) && !changed[pos]) {
                changed[pos] = true;
                ++marked;
            }
        }
    }

    std::uint64_t base_offset = 0;
    for (auto& t : next.tensors) {
        const std::uint64_t n = t.numel();
        for (std::uint64_t i = 0; i < n; ++i) {
            if (changed[base_offset + i])
                t.data[i].bits ^= 1;  // lowest mantissa bit: guaranteed bitwise-different
        }
        base_offset += n;
    }
    return next;
}

/// Generates a consecutive checkpoint pair; all randomness is fixed by the
/// seed.
inline std::pair<Checkpoint, Checkpoint> generate_synthetic(const SyntheticSpec& spec) {
    Checkpoint base = generate_base_checkpoint(spec);
    Checkpoint next = mutate_checkpoint(base, spec.sparsity, spec.cluster_width, spec.seed, 1);
    return {std::move(base), std::move(next)};
}

}  // namespace pulse
