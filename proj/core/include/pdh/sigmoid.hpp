// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cmath>
#include <limits>

namespace pdh {

/// q = 1 / (1 + e^x). Note the orientation: this is DECREASING in x. The
/// likelihood estimator is trained so that a strongly negative logit means
/// bit = 1, matching the posterior/binarization conventions used everywhere
/// in this codebase.
///
/// Never overflows; saturates into the open interval (0, 1) instead of
/// rounding to exactly 0 or 1 for |x| beyond ~745.
inline double stable_sigmoid(double x) {
    double q;
    if (x >= 0.0) {
        const double e = std::exp(-x);
        q = e / (1.0 + e);
    } else {
        q = 1.0 / (1.0 + std::exp(x));
    }
    if (q <= 0.0) {
        q = std::numeric_limits<double>::min();
    } else if (q >= 1.0) {
        q = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    }
    return q;
}

}  // namespace pdh
