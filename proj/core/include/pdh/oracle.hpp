// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

#include "pdh/hash_code.hpp"
#include "pdh/rng.hpp"

namespace pdh::oracle {

/// A random bipartition family over the class set: flag(i, j) = 1 places
/// class i on the "1" side of bit j. Sampling with fair independent coins
/// may leave one side of a bit empty; posterior computations reject such
/// bits explicitly instead of silently dividing by zero.
struct IdealFamily {
    uint32_t num_classes = 0;
    uint32_t code_bits = 0;
    std::vector<uint8_t> flags;  // row-major [class][bit]

    uint8_t flag(uint32_t class_index, uint32_t bit) const {
        return flags[static_cast<std::size_t>(class_index) * code_bits + bit];
    }
    /// Number of classes on the "1" side of a bit.
    uint32_t alpha1(uint32_t bit) const;
    uint32_t alpha0(uint32_t bit) const { return num_classes - alpha1(bit); }
};

/// Independent fair coin per (class, bit); deterministic given the rng state.
IdealFamily sample_family(Rng& rng, uint32_t num_classes, uint32_t code_bits);

/// The class's ideal code: bit j = flag(class, j).
HashCode ideal_code(const IdealFamily& family, uint32_t class_index);

/// Monte Carlo mean of the Hamming distance between the ideal codes of two
/// fixed distinct classes (0 and 1), over `trials` freshly sampled families.
/// Converges to n/2 at the binomial rate (per-trial variance n/4).
double expected_cross_distance_mc(Rng& rng, uint32_t num_classes, uint32_t code_bits,
                                  uint64_t trials);

/// A finite discrete image space with exactly known class-conditional
/// probabilities: density[i][p] = Pr(p | class i), each row summing to 1.
/// Class priors are uniform 1/num_classes. Everything downstream of Bayes'
/// theorem is exactly computable here, which is the whole point.
struct DiscreteWorld {
    uint32_t num_classes = 0;
    std::size_t num_points = 0;
    std::vector<std::vector<double>> density;  // [class][point]

    /// Throws unless every row is nonnegative and sums to 1 within 1e-12.
    void validate() const;
};

/// Random world for property tests: per-class densities drawn uniform and
/// normalized.
DiscreteWorld random_world(Rng& rng, uint32_t num_classes, std::size_t num_points);

struct PosteriorResult {
    double logit;      // log-odds of bit = 0 versus bit = 1; +/-inf at zero-density limits
    double posterior;  // Pr(h_j = 1 | p); exactly 0 or 1 at the limits
};

/// Posterior of bit j at a point, via the likelihood route: per-side
/// likelihoods Pr(p | h_j = u) (each side's classes weighted 1/alpha_u),
/// multiplied by the side priors Pr(h_j = u) = alpha_u / num_classes, then
/// combined into log-odds and squashed through 1/(1 + e^x).
///
/// Limits are taken by continuity: a zero-mass "1" side gives posterior
/// exactly 0, a zero-mass "0" side exactly 1. Throws if either family side
/// is empty for this bit, or if the point has zero probability under every
/// class.
PosteriorResult analytic_posterior(const DiscreteWorld& world, const IdealFamily& family,
                                   std::size_t point, uint32_t bit);

/// The same posterior by the dumbest possible route: enumerate classes,
/// form Pr(class | p) by total probability with uniform priors, and add up
/// the classes on the "1" side. Serves as the independent check for the
/// analytic route.
double bayes_posterior_bruteforce(const DiscreteWorld& world, const IdealFamily& family,
                                  std::size_t point, uint32_t bit);

struct GridDisagreement {
    double q;
    double q_prime;
    int sigma;           // MAP bit-difference estimate from Pr(|h - h'| = 1) >= 0.5
    int threshold_diff;  // |binarize(q) - binarize(q')|
};

/// Scans the grid {step, 2*step, ...} x {same} for points where the MAP
/// estimate of the per-bit distance disagrees with the thresholded-bit
/// difference. Exact 0.5 grid values are excluded; off that boundary the two
/// are provably identical, so the expected result is an empty list.
/// include_half_point additionally evaluates the single boundary point
/// (0.5, 0.5), where the estimates genuinely differ (sigma = 1, diff = 0).
std::vector<GridDisagreement> map_equivalence_scan(double grid_step,
                                                   bool include_half_point = false);

}  // namespace pdh::oracle
