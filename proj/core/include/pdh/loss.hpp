// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

namespace pdh {

/// Expected Hamming distance between two codes whose bits are independent
/// Bernoulli draws with the given probabilities:
///   sum_j [ q_j (1 - q'_j) + (1 - q_j) q'_j ].
/// Symmetric in its arguments, ranges over [0, n]. Throws on length
/// mismatch or entries outside [0, 1].
double expected_hamming(const std::vector<double>& q, const std::vector<double>& q_prime);

/// One (anchor, positive) posterior pair per class in the batch, indexed by
/// batch position. Anchor i and positive i share a label by construction.
struct PairBatch {
    std::vector<std::vector<double>> anchors;
    std::vector<std::vector<double>> positives;

    std::size_t pair_count() const { return anchors.size(); }
};

/// The N-pair contrastive objective. With e = expected_hamming:
///   L = sum_i { e(a_i, p_i)^2 + sum_{r != i} max(n/2 - e(a_i, p_r), 0)^2 }
/// Within-class terms pull the expected distance to 0; the squared hinge
/// pushes every anchor at least n/2 away from every other class's positive.
/// There are no tunable weights: the only inputs are the posteriors and n.
double npair_contrastive_loss(const PairBatch& batch, uint32_t code_bits);

struct PairBatchGrads {
    std::vector<std::vector<double>> anchors;
    std::vector<std::vector<double>> positives;
};

/// dL/dq for every posterior in the batch. d e(q, q')/d q_j = 1 - 2 q'_j;
/// a hinge term contributes nothing once n/2 - e <= 0 (the boundary counts
/// as inactive).
PairBatchGrads loss_grad_wrt_posteriors(const PairBatch& batch, uint32_t code_bits);

/// dL/dx for every sample, chaining through q = 1/(1 + e^x):
/// dq_j/dx_j = -q_j (1 - q_j). Note the sign: the posterior is decreasing
/// in the logit.
PairBatchGrads loss_grad_wrt_logits(const PairBatch& batch, uint32_t code_bits);

}  // namespace pdh
