// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace pdh {

std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> x, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite_diff_gradient: step h must be > 0");
    }
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f(x);
        x[i] = saved - h;
        const double fm = f(x);
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::invalid_argument("finite_diff_gradient: non-finite function value");
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double gradcheck_relative_error(double a, double b) {
    const double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
    return std::fabs(a - b) / denom;
}

}  // namespace pdh
