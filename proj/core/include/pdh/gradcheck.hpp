// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <functional>
#include <vector>

namespace pdh {

/// Central-difference gradient estimate: g_i = (f(x + h e_i) - f(x - h e_i)) / 2h.
/// Throws if h <= 0 or if f returns a non-finite value at any probe point.
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> x, double h);

/// Relative error used by all gradient checks: |a - b| / max(|a|, |b|, 1e-8).
double gradcheck_relative_error(double a, double b);

}  // namespace pdh
