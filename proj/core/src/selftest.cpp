// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "pdh/gradcheck.hpp"
#include "pdh/loss.hpp"
#include "pdh/oracle.hpp"
#include "pdh/rng.hpp"
#include "pdh/sigmoid.hpp"

namespace pdh::selftest {

namespace {

// Loss of a 2-class N-pair batch (4 samples) as a function of flat params.
double batch_loss(const ModelConfig& cfg, const Parameters& params,
                  const std::vector<std::vector<double>>& inputs, uint32_t code_bits) {
    PairBatch batch;
    batch.anchors = {posteriors(forward(cfg, params, inputs[0])),
                     posteriors(forward(cfg, params, inputs[1]))};
    batch.positives = {posteriors(forward(cfg, params, inputs[2])),
                       posteriors(forward(cfg, params, inputs[3]))};
    return npair_contrastive_loss(batch, code_bits);
}

}  // namespace

namespace {

// Analytic gradient of the 2-class batch loss with respect to flat params.
std::vector<double> analytic_batch_grad(const ModelConfig& cfg, const Parameters& params,
                                        const std::vector<std::vector<double>>& inputs) {
    PairBatch batch;
    std::vector<ForwardTrace> traces(4);
    batch.anchors = {posteriors(forward(cfg, params, inputs[0], &traces[0])),
                     posteriors(forward(cfg, params, inputs[1], &traces[1]))};
    batch.positives = {posteriors(forward(cfg, params, inputs[2], &traces[2])),
                       posteriors(forward(cfg, params, inputs[3], &traces[3]))};
    const PairBatchGrads logit_grads = loss_grad_wrt_logits(batch, cfg.code_bits);
    Gradients grads = Gradients::zeros_like(params);
    backward(cfg, params, traces[0], logit_grads.anchors[0], grads);
    backward(cfg, params, traces[1], logit_grads.anchors[1], grads);
    backward(cfg, params, traces[2], logit_grads.positives[0], grads);
    backward(cfg, params, traces[3], logit_grads.positives[1], grads);
    return flatten_gradients(grads);
}

}  // namespace

GradCheckResult gradcheck_loss_through_model(const ModelConfig& cfg, uint64_t seed,
                                             std::size_t trials, std::size_t coords_per_trial) {
    cfg.validate();
    constexpr double kH = 1e-5;
    constexpr double kTol = 1e-4;

    GradCheckResult result;
    result.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng(seed + trial);
        Parameters params = init_params(cfg, rng);
        std::vector<std::vector<double>> inputs(4);
        for (auto& in : inputs) {
            in.resize(cfg.input.size());
            for (auto& v : in) {
                v = rng.next_double();
            }
        }

        std::vector<double> analytic = analytic_batch_grad(cfg, params, inputs);
        std::vector<double> theta = flatten_parameters(params);

        std::vector<std::size_t> coords;
        if (coords_per_trial == 0 || coords_per_trial >= theta.size()) {
            coords.resize(theta.size());
            for (std::size_t i = 0; i < coords.size(); ++i) {
                coords[i] = i;
            }
        } else {
            // Stratified over the flat vector so every tensor gets probed.
            const std::size_t stride = theta.size() / coords_per_trial;
            for (std::size_t i = 0; i < coords_per_trial; ++i) {
                coords.push_back(i * stride + rng.next_below(stride));
            }
        }

        // Re-seated copy, filled lazily: a coordinate sitting exactly on a
        // relu plateau or pool tie is non-differentiable, so the quotient
        // disagrees at every h. Nudging the whole parameter vector moves to
        // a nearby differentiable point where a correct backward must agree.
        std::vector<double> theta_nudged;
        std::vector<double> analytic_nudged;

        const auto fd_coord = [&](std::vector<double>& at, std::size_t coord, double h) {
            const double saved = at[coord];
            at[coord] = saved + h;
            const double fp = batch_loss(cfg, unflatten_parameters(cfg, at), inputs,
                                         cfg.code_bits);
            at[coord] = saved - h;
            const double fm = batch_loss(cfg, unflatten_parameters(cfg, at), inputs,
                                         cfg.code_bits);
            at[coord] = saved;
            return (fp - fm) / (2.0 * h);
        };

        for (std::size_t coord : coords) {
            double rel = gradcheck_relative_error(analytic[coord], fd_coord(theta, coord, kH));
            if (rel > kTol) {
                rel = gradcheck_relative_error(analytic[coord],
                                               fd_coord(theta, coord, kH / 16.0));
            }
            if (rel > kTol) {
                if (theta_nudged.empty()) {
                    theta_nudged = theta;
                    Rng nudge(seed ^ (trial * 0x9e3779b97f4a7c15ULL));
                    for (auto& v : theta_nudged) {
                        v += nudge.uniform(-1e-3, 1e-3);
                    }
                    analytic_nudged = analytic_batch_grad(
                        cfg, unflatten_parameters(cfg, theta_nudged), inputs);
                }
                rel = gradcheck_relative_error(analytic_nudged[coord],
                                               fd_coord(theta_nudged, coord, kH));
                if (rel > kTol) {
                    rel = gradcheck_relative_error(analytic_nudged[coord],
                                                   fd_coord(theta_nudged, coord, kH / 16.0));
                }
            }
            result.max_rel_error = std::max(result.max_rel_error, rel);
            if (rel > kTol) {
                ++result.failures;
            }
            ++result.checked_coords;
        }
    }
    return result;
}

CrossCheckResult bayes_posterior_crosscheck(uint64_t seed, std::size_t tuples) {
    Rng rng(seed);
    CrossCheckResult result;
    while (result.tuples < tuples) {
        const uint32_t num_classes = 2 + static_cast<uint32_t>(rng.next_below(7));
        const std::size_t num_points = 2 + rng.next_below(31);
        const oracle::DiscreteWorld world = oracle::random_world(rng, num_classes, num_points);
        const oracle::IdealFamily family = oracle::sample_family(rng, num_classes, 8);
        const uint32_t bit = static_cast<uint32_t>(rng.next_below(8));
        if (family.alpha1(bit) == 0 || family.alpha0(bit) == 0) {
            continue;
        }
        const std::size_t point = rng.next_below(num_points);
        const double analytic = oracle::analytic_posterior(world, family, point, bit).posterior;
        const double brute = oracle::bayes_posterior_bruteforce(world, family, point, bit);
        result.max_abs_diff = std::max(result.max_abs_diff, std::fabs(analytic - brute));
        ++result.tuples;
    }
    return result;
}

McHammingResult mc_expected_hamming(uint64_t seed, std::size_t pairs, std::size_t draws,
                                    uint32_t bits) {
    Rng rng(seed);
    McHammingResult result;
    result.pairs = pairs;
    for (std::size_t pair = 0; pair < pairs; ++pair) {
        std::vector<double> q(bits);
        std::vector<double> qp(bits);
        for (uint32_t j = 0; j < bits; ++j) {
            q[j] = rng.next_double();
            qp[j] = rng.next_double();
        }
        const double analytic = expected_hamming(q, qp);

        double variance = 0.0;  // per-draw variance of the distance
        for (uint32_t j = 0; j < bits; ++j) {
            const double r = q[j] * (1.0 - qp[j]) + (1.0 - q[j]) * qp[j];
            variance += r * (1.0 - r);
        }
        const double sigma = std::sqrt(variance / static_cast<double>(draws));

        uint64_t total = 0;
        for (std::size_t d = 0; d < draws; ++d) {
            for (uint32_t j = 0; j < bits; ++j) {
                const bool b = rng.next_double() < q[j];
                const bool bp = rng.next_double() < qp[j];
                total += b != bp ? 1 : 0;
            }
        }
        const double empirical = static_cast<double>(total) / static_cast<double>(draws);
        const double ratio = std::fabs(empirical - analytic) / sigma;
        result.worst_sigma_ratio = std::max(result.worst_sigma_ratio, ratio);
        if (ratio > 4.0) {
            ++result.failures;
        }
    }
    return result;
}

namespace {

class Reporter {
public:
    explicit Reporter(std::ostream& out) : out_(out) {}

    void check(const std::string& name, bool ok, const std::string& observed) {
        out_ << (ok ? "PASS" : "FAIL") << "  " << name << "  (" << observed << ")\n";
        if (!ok) {
            ++failures_;
        }
    }

    int failures() const { return failures_; }

private:
    std::ostream& out_;
    int failures_ = 0;
};

std::string fmt(const char* format, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), format, a, b);
    return buf;
}

}  // namespace

int run(const Options& options) {
    std::ostream& out = options.out ? *options.out : std::cout;
    const auto sigmoid = options.sigmoid ? options.sigmoid
                                         : std::function<double(double)>(
                                               [](double x) { return stable_sigmoid(x); });
    Reporter report(out);
    const uint64_t seed = options.seed;

    // Posterior-squashing identities of q = 1/(1+e^x).
    {
        double worst = std::fabs(sigmoid(0.0) - 0.5);
        worst = std::max(worst, std::fabs(sigmoid(std::log(3.0)) - 0.25));
        for (int i = -500; i <= 500; ++i) {
            const double x = static_cast<double>(i) * 0.1;
            worst = std::max(worst, std::fabs(sigmoid(x) + sigmoid(-x) - 1.0));
        }
        const double saturated = sigmoid(800.0);
        const bool sane = saturated > 0.0 && saturated <= 1e-300 && sigmoid(-800.0) < 1.0 &&
                          sigmoid(-800.0) > 1.0 - 1e-15;
        report.check("sigmoid identities", worst <= 1e-12 && sane,
                     fmt("max deviation %.3e", worst));
    }

    // Analytic loss gradients through both presets vs finite differences.
    {
        const auto mlp = gradcheck_loss_through_model(ModelConfig::mlp_small(3, 8), seed,
                                                      options.full ? 20 : 5, 0);
        report.check("gradient check mlp-small",
                     mlp.failures == 0 && mlp.max_rel_error <= 1e-4,
                     fmt("max rel err %.3e", mlp.max_rel_error));
        const auto conv = gradcheck_loss_through_model(
            ModelConfig::conv_small(16, 16, 1, 6), seed + 1, options.full ? 10 : 3,
            options.full ? 40 : 24);
        report.check("gradient check conv-small",
                     conv.failures == 0 && conv.max_rel_error <= 1e-4,
                     fmt("max rel err %.3e", conv.max_rel_error));
    }

    // MAP-equivalence: thresholded bits against per-bit MAP, full grid.
    {
        const auto off_boundary = oracle::map_equivalence_scan(0.01, false);
        report.check("MAP equivalence off-boundary grid", off_boundary.empty(),
                     fmt("%0.f disagreements", static_cast<double>(off_boundary.size())));
        const auto with_boundary = oracle::map_equivalence_scan(0.01, true);
        const bool anomaly_only =
            with_boundary.size() == 1 && with_boundary[0].q == 0.5 &&
            with_boundary[0].q_prime == 0.5 && with_boundary[0].sigma == 1 &&
            with_boundary[0].threshold_diff == 0;
        report.check("MAP boundary anomaly at (0.5, 0.5)", anomaly_only,
                     fmt("%0.f disagreement(s)", static_cast<double>(with_boundary.size())));
    }

    // Bayes posterior: analytic route vs direct enumeration.
    {
        const auto cc = bayes_posterior_crosscheck(seed + 2, 1000);
        report.check("Bayes posterior cross-check", cc.max_abs_diff <= 1e-12,
                     fmt("max |analytic - brute| %.3e", cc.max_abs_diff));
    }

    // Ideal-family distances: same class exactly 0, cross classes n/2.
    {
        Rng rng(seed + 3);
        bool same_zero = true;
        for (int t = 0; t < 200; ++t) {
            const auto family = oracle::sample_family(rng, 10, 48);
            const uint32_t c = static_cast<uint32_t>(rng.next_below(10));
            if (hamming(oracle::ideal_code(family, c), oracle::ideal_code(family, c)) != 0) {
                same_zero = false;
            }
        }
        report.check("ideal same-class distance", same_zero, "exactly 0 on 200 families");

        const uint64_t trials = options.full ? 100000 : 10000;
        const double mean = oracle::expected_cross_distance_mc(rng, 10, 48, trials);
        const double tolerance = 4.0 * std::sqrt(48.0 / 4.0) / std::sqrt(static_cast<double>(trials));
        report.check("ideal cross-class distance n/2", std::fabs(mean - 24.0) <= tolerance,
                     fmt("mean %.4f vs 24 +/- %.4f", mean, tolerance));

        // Family coin fairness: the empirical flag mean sits in the 4-sigma
        // band of a fair Bernoulli.
        const uint64_t flips = options.full ? 100000 : 20000;
        uint64_t ones = 0;
        for (uint64_t i = 0; i < flips; ++i) {
            const auto family = oracle::sample_family(rng, 1, 1);
            ones += family.flags[0];
        }
        const double mean_flag = static_cast<double>(ones) / static_cast<double>(flips);
        const double flag_tol = 4.0 * 0.5 / std::sqrt(static_cast<double>(flips));
        report.check("family assignment fairness", std::fabs(mean_flag - 0.5) <= flag_tol,
                     fmt("mean %.4f vs 0.5 +/- %.4f", mean_flag, flag_tol));
    }

    // Expected Hamming distance vs Bernoulli Monte Carlo.
    {
        const auto mc = options.full ? mc_expected_hamming(seed + 4, 100, 100000, 16)
                                     : mc_expected_hamming(seed + 4, 20, 20000, 16);
        report.check("expected Hamming Monte Carlo", mc.failures == 0,
                     fmt("worst |diff|/sigma %.2f (4.0 allowed)", mc.worst_sigma_ratio));
    }

    return report.failures();
}

}  // namespace pdh::selftest
