// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <vector>

#include "pdh/matrix.hpp"

namespace pdh {

struct SgdConfig {
    double learning_rate = 0.05;
    double momentum = 0.9;  // in [0, 1)

    void validate() const;
};

/// Classical momentum update over parallel lists of tensors:
///   v <- momentum * v - lr * g
///   p <- p + v
/// momentum = 0 degenerates to plain SGD. Throws on any shape mismatch.
void sgd_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
              const SgdConfig& cfg, std::vector<Matrix>& velocity);

}  // namespace pdh
