// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pdh/sigmoid.hpp"

namespace pdh::oracle {

uint32_t IdealFamily::alpha1(uint32_t bit) const {
    uint32_t count = 0;
    for (uint32_t i = 0; i < num_classes; ++i) {
        count += flag(i, bit);
    }
    return count;
}

IdealFamily sample_family(Rng& rng, uint32_t num_classes, uint32_t code_bits) {
    if (num_classes == 0 || code_bits == 0) {
        throw std::invalid_argument("sample_family: num_classes and code_bits must be >= 1");
    }
    IdealFamily family;
    family.num_classes = num_classes;
    family.code_bits = code_bits;
    family.flags.resize(static_cast<std::size_t>(num_classes) * code_bits);
    for (auto& f : family.flags) {
        f = rng.next_coin() ? 1 : 0;
    }
    return family;
}

HashCode ideal_code(const IdealFamily& family, uint32_t class_index) {
    if (class_index >= family.num_classes) {
        throw std::invalid_argument("ideal_code: class index " + std::to_string(class_index) +
                                    " out of range");
    }
    HashCode code(family.code_bits);
    for (uint32_t j = 0; j < family.code_bits; ++j) {
        if (family.flag(class_index, j)) {
            code.set_bit(j, true);
        }
    }
    return code;
}

double expected_cross_distance_mc(Rng& rng, uint32_t num_classes, uint32_t code_bits,
                                  uint64_t trials) {
    if (num_classes < 2) {
        throw std::invalid_argument("expected_cross_distance_mc: needs >= 2 classes");
    }
    if (trials == 0) {
        throw std::invalid_argument("expected_cross_distance_mc: needs >= 1 trial");
    }
    uint64_t total = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        const IdealFamily family = sample_family(rng, num_classes, code_bits);
        total += hamming(ideal_code(family, 0), ideal_code(family, 1));
    }
    return static_cast<double>(total) / static_cast<double>(trials);
}

void DiscreteWorld::validate() const {
    if (num_classes == 0 || num_points == 0) {
        throw std::invalid_argument("DiscreteWorld: empty class set or point set");
    }
    if (density.size() != num_classes) {
        throw std::invalid_argument("DiscreteWorld: density row count mismatch");
    }
    for (uint32_t i = 0; i < num_classes; ++i) {
        if (density[i].size() != num_points) {
            throw std::invalid_argument("DiscreteWorld: density column count mismatch");
        }
        double sum = 0.0;
        for (double d : density[i]) {
            if (!(d >= 0.0)) {
                throw std::invalid_argument("DiscreteWorld: negative density");
            }
            sum += d;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("DiscreteWorld: class " + std::to_string(i) +
                                        " density sums to " + std::to_string(sum));
        }
    }
}

DiscreteWorld random_world(Rng& rng, uint32_t num_classes, std::size_t num_points) {
    DiscreteWorld world;
    world.num_classes = num_classes;
    world.num_points = num_points;
    world.density.assign(num_classes, std::vector<double>(num_points, 0.0));
    for (auto& row : world.density) {
        double sum = 0.0;
        for (auto& d : row) {
            d = rng.next_double();
            sum += d;
        }
        for (auto& d : row) {
            d /= sum;
        }
        // Renormalization drift from the division is within validate()'s
        // 1e-12 budget for the point counts used here.
    }
    world.validate();
    return world;
}

namespace {

void check_posterior_args(const DiscreteWorld& world, const IdealFamily& family,
                          std::size_t point, uint32_t bit) {
    if (family.num_classes != world.num_classes) {
        throw std::invalid_argument("posterior: world and family class counts differ");
    }
    if (point >= world.num_points) {
        throw std::invalid_argument("posterior: point index out of range");
    }
    if (bit >= family.code_bits) {
        throw std::invalid_argument("posterior: bit index out of range");
    }
}

}  // namespace

PosteriorResult analytic_posterior(const DiscreteWorld& world, const IdealFamily& family,
                                   std::size_t point, uint32_t bit) {
    check_posterior_args(world, family, point, bit);
    const uint32_t nc = world.num_classes;
    const uint32_t a1 = family.alpha1(bit);
    const uint32_t a0 = nc - a1;
    if (a1 == 0 || a0 == 0) {
        throw std::invalid_argument("analytic_posterior: family side empty for bit " +
                                    std::to_string(bit));
    }

    double mass1 = 0.0;  // density mass of the classes on the "1" side
    double mass0 = 0.0;
    for (uint32_t v = 0; v < nc; ++v) {
        const double d = world.density[v][point];
        if (family.flag(v, bit)) {
            mass1 += d;
        } else {
            mass0 += d;
        }
    }

    // Side likelihoods Pr(p | h = u) and side priors Pr(h = u); the joint
    // masses they produce are what Bayes' theorem actually compares.
    const double lik1 = mass1 / a1;
    const double lik0 = mass0 / a0;
    const double prior1 = static_cast<double>(a1) / nc;
    const double prior0 = static_cast<double>(a0) / nc;
    const double joint1 = lik1 * prior1;
    const double joint0 = lik0 * prior0;

    if (joint0 == 0.0 && joint1 == 0.0) {
        throw std::invalid_argument("analytic_posterior: point has zero probability");
    }
    if (joint1 == 0.0) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    if (joint0 == 0.0) {
        return {-std::numeric_limits<double>::infinity(), 1.0};
    }
    const double x = std::log(joint0) - std::log(joint1);
    return {x, stable_sigmoid(x)};
}

double bayes_posterior_bruteforce(const DiscreteWorld& world, const IdealFamily& family,
                                  std::size_t point, uint32_t bit) {
    check_posterior_args(world, family, point, bit);
    const uint32_t nc = world.num_classes;
    if (family.alpha1(bit) == 0 || family.alpha0(bit) == 0) {
        throw std::invalid_argument("bayes_posterior_bruteforce: family side empty for bit " +
                                    std::to_string(bit));
    }
    const double prior = 1.0 / nc;
    double total = 0.0;
    double on_side1 = 0.0;
    for (uint32_t i = 0; i < nc; ++i) {
        const double joint = prior * world.density[i][point];
        total += joint;
        if (family.flag(i, bit)) {
            on_side1 += joint;
        }
    }
    if (total == 0.0) {
        throw std::invalid_argument("bayes_posterior_bruteforce: point has zero probability");
    }
    return on_side1 / total;
}

std::vector<GridDisagreement> map_equivalence_scan(double grid_step, bool include_half_point) {
    if (!(grid_step > 0.0 && grid_step < 0.5)) {
        throw std::invalid_argument("map_equivalence_scan: grid step must be in (0, 0.5)");
    }
    const long divisions = std::lround(1.0 / grid_step);
    std::vector<double> grid;
    for (long i = 1; i < divisions; ++i) {
        const double v = static_cast<double>(i) / static_cast<double>(divisions);
        if (v != 0.5) {
            grid.push_back(v);
        }
    }

    std::vector<GridDisagreement> disagreements;
    auto check_point = [&](double q, double qp) {
        const double p_differ = q * (1.0 - qp) + (1.0 - q) * qp;
        const int sigma = p_differ >= 0.5 ? 1 : 0;
        const int diff = (q >= 0.5 ? 1 : 0) ^ (qp >= 0.5 ? 1 : 0);
        if (sigma != diff) {
            disagreements.push_back({q, qp, sigma, diff});
        }
    };

    for (double q : grid) {
        for (double qp : grid) {
            check_point(q, qp);
        }
    }
    if (include_half_point) {
        check_point(0.5, 0.5);
    }
    return disagreements;
}

}  // namespace pdh::oracle
