// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "pdh/model.hpp"

namespace pdh::selftest {

/// Gradient check of the full N-pair loss through a model: analytic
/// dL/d(parameters) against central finite differences at h = 1e-5, per
/// coordinate, relative error <= 1e-4 with denominator max(|a|, |b|, 1e-8).
///
/// coords_per_trial = 0 checks every coordinate; otherwise that many
/// coordinates are sampled per trial, spread across all tensors.
///
/// Finite differences are only an oracle at differentiable points, so a
/// failing coordinate is re-measured before it counts: first at h/16 (a
/// kink inside the probe window), then at a nearby nudged parameter point
/// (the probe sat exactly on a relu plateau or pool tie). A genuinely wrong
/// analytic gradient fails all of these.
struct GradCheckResult {
    std::size_t trials = 0;
    std::size_t checked_coords = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;  // after retries
};
GradCheckResult gradcheck_loss_through_model(const ModelConfig& cfg, uint64_t seed,
                                             std::size_t trials, std::size_t coords_per_trial);

/// Bayes oracle cross-check: |analytic - bruteforce| over random
/// (world, family, point, bit) tuples, skipping bits with an empty family
/// side (they are rejected by contract, not silently fixed).
struct CrossCheckResult {
    std::size_t tuples = 0;
    double max_abs_diff = 0.0;
};
CrossCheckResult bayes_posterior_crosscheck(uint64_t seed, std::size_t tuples);

/// Expected-Hamming formula against Bernoulli Monte Carlo: for each random
/// (q, q') pair, |analytic - empirical mean| must stay within
/// 4 * sqrt(sum_j r_j (1 - r_j) / draws), the exact 4-sigma band of the sum
/// of independent indicator draws.
struct McHammingResult {
    std::size_t pairs = 0;
    std::size_t failures = 0;
    double worst_sigma_ratio = 0.0;  // max |diff| / sigma observed
};
McHammingResult mc_expected_hamming(uint64_t seed, std::size_t pairs, std::size_t draws,
                                    uint32_t bits);

struct Options {
    bool full = false;  // full level runs the 1e5-draw Monte Carlo suites
    uint64_t seed = 2024;
    std::function<double(double)> sigmoid;  // test hook; defaults to stable_sigmoid
    std::ostream* out = nullptr;            // defaults to std::cout
};

/// Runs every oracle-backed property, printing one PASS/FAIL line per
/// property with the observed statistic. Returns the number of failures.
int run(const Options& options);

}  // namespace pdh::selftest
