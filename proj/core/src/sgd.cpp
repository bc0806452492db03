// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/sgd.hpp"

#include <stdexcept>

namespace pdh {

void SgdConfig::validate() const {
    // learning_rate 0 is allowed so the degenerate "no update" run stays usable.
    if (!(learning_rate >= 0.0)) {
        throw std::invalid_argument("SgdConfig: learning_rate must be >= 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("SgdConfig: momentum must be in [0, 1)");
    }
}

void sgd_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
              const SgdConfig& cfg, std::vector<Matrix>& velocity) {
    cfg.validate();
    if (params.size() != grads.size() || params.size() != velocity.size()) {
        throw std::invalid_argument("sgd_step: tensor list lengths differ");
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!params[t].same_shape(grads[t]) || !params[t].same_shape(velocity[t])) {
            throw std::invalid_argument("sgd_step: tensor shape mismatch at index " +
                                        std::to_string(t));
        }
        auto& p = params[t].values();
        const auto& g = grads[t].values();
        auto& v = velocity[t].values();
        for (std::size_t i = 0; i < p.size(); ++i) {
            v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i];
            p[i] += v[i];
        }
    }
}

}  // namespace pdh
