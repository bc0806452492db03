// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/loss.hpp"

#include <stdexcept>
#include <string>

namespace pdh {

namespace {

void check_posteriors(const std::vector<double>& q, uint32_t n, const char* what) {
    if (q.size() != n) {
        throw std::invalid_argument(std::string(what) + ": posterior length " +
                                    std::to_string(q.size()) + " does not match code length " +
                                    std::to_string(n));
    }
    for (double v : q) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(std::string(what) + ": posterior outside [0, 1]");
        }
    }
}

void check_batch(const PairBatch& batch, uint32_t n) {
    if (batch.anchors.empty()) {
        throw std::invalid_argument("npair loss: empty batch");
    }
    if (batch.anchors.size() != batch.positives.size()) {
        throw std::invalid_argument("npair loss: anchor/positive count mismatch");
    }
    for (const auto& q : batch.anchors) {
        check_posteriors(q, n, "npair loss");
    }
    for (const auto& q : batch.positives) {
        check_posteriors(q, n, "npair loss");
    }
}

}  // namespace

double expected_hamming(const std::vector<double>& q, const std::vector<double>& q_prime) {
    if (q.size() != q_prime.size()) {
        throw std::invalid_argument("expected_hamming: length mismatch, " +
                                    std::to_string(q.size()) + " vs " +
                                    std::to_string(q_prime.size()));
    }
    check_posteriors(q, static_cast<uint32_t>(q.size()), "expected_hamming");
    check_posteriors(q_prime, static_cast<uint32_t>(q_prime.size()), "expected_hamming");
    double e = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        e += q[j] * (1.0 - q_prime[j]) + (1.0 - q[j]) * q_prime[j];
    }
    return e;
}

double npair_contrastive_loss(const PairBatch& batch, uint32_t code_bits) {
    check_batch(batch, code_bits);
    const double half_n = static_cast<double>(code_bits) / 2.0;
    const std::size_t nc = batch.pair_count();
    double loss = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        const double within = expected_hamming(batch.anchors[i], batch.positives[i]);
        loss += within * within;
        for (std::size_t r = 0; r < nc; ++r) {
            if (r == i) {
                continue;
            }
            const double cross = expected_hamming(batch.anchors[i], batch.positives[r]);
            const double hinge = half_n - cross;
            if (hinge > 0.0) {
                loss += hinge * hinge;
            }
        }
    }
    return loss;
}

PairBatchGrads loss_grad_wrt_posteriors(const PairBatch& batch, uint32_t code_bits) {
    check_batch(batch, code_bits);
    const double half_n = static_cast<double>(code_bits) / 2.0;
    const std::size_t nc = batch.pair_count();
    const std::size_t n = code_bits;

    PairBatchGrads grads;
    grads.anchors.assign(nc, std::vector<double>(n, 0.0));
    grads.positives.assign(nc, std::vector<double>(n, 0.0));

    for (std::size_t i = 0; i < nc; ++i) {
        const auto& a = batch.anchors[i];
        for (std::size_t r = 0; r < nc; ++r) {
            const auto& p = batch.positives[r];
            const double e = expected_hamming(a, p);
            double coeff;  // dL/de for this (anchor, positive) pairing
            if (r == i) {
                coeff = 2.0 * e;
            } else {
                const double hinge = half_n - e;
                if (hinge <= 0.0) {
                    continue;
                }
                coeff = -2.0 * hinge;
            }
            for (std::size_t j = 0; j < n; ++j) {
                grads.anchors[i][j] += coeff * (1.0 - 2.0 * p[j]);
                grads.positives[r][j] += coeff * (1.0 - 2.0 * a[j]);
            }
        }
    }
    return grads;
}

PairBatchGrads loss_grad_wrt_logits(const PairBatch& batch, uint32_t code_bits) {
    PairBatchGrads grads = loss_grad_wrt_posteriors(batch, code_bits);
    for (std::size_t i = 0; i < batch.pair_count(); ++i) {
        for (std::size_t j = 0; j < code_bits; ++j) {
            const double qa = batch.anchors[i][j];
            const double qp = batch.positives[i][j];
            grads.anchors[i][j] *= -qa * (1.0 - qa);
            grads.positives[i][j] *= -qp * (1.0 - qp);
        }
    }
    return grads;
}

}  // namespace pdh
