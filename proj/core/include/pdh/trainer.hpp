// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

#include "pdh/model.hpp"
#include "pdh/rng.hpp"
#include "pdh/sgd.hpp"

namespace pdh {

/// Labeled images with pixel values in [0, 1]. Every image belongs to
/// exactly one class; classes used for training must hold at least two
/// images so an (anchor, positive) pair can be formed.
struct LabeledDataset {
    TensorShape shape;
    bool flat = true;  // true: shape is (1, 1, m)
    std::vector<std::vector<double>> images;
    std::vector<uint16_t> labels;
    uint32_t num_classes = 0;

    std::size_t size() const { return images.size(); }

    /// Structural checks: parallel arrays, label range, image sizes, pixel
    /// range. Throws DataError on the first violation.
    void validate() const;

    /// Image indices grouped by label, ascending within each class.
    std::vector<std::vector<std::size_t>> indices_by_class() const;
};

struct TrainConfig {
    uint32_t code_bits = 12;
    SgdConfig sgd;
    uint32_t epochs = 20;
    uint32_t shift_pixels = 0;  // 0..4; augmentation off at 0
    bool horizontal_flip = false;
    uint64_t seed = 0;

    void validate() const;
};

/// One sampled (anchor, positive) image pair per class.
struct SampledPair {
    std::size_t anchor;
    std::size_t positive;
};

/// For each of the num_classes classes, in class order, draws two distinct
/// image indices uniformly without replacement. Throws DataError naming the
/// class if any class has fewer than two images.
std::vector<SampledPair> sample_npair_batch(const LabeledDataset& ds, Rng& rng);

/// Integer-pixel translation with zero padding: output(x) = input(x - dx),
/// likewise rows with dy. Flat tensors pass through untouched.
std::vector<double> shift_image(const std::vector<double>& img, TensorShape shape, int dx, int dy);

/// Mirror around the vertical axis.
std::vector<double> flip_image_horizontal(const std::vector<double>& img, TensorShape shape);

/// Random shift in [-shift_pixels, +shift_pixels]^2 plus an optional
/// fair-coin horizontal flip. Disabled knobs consume no rng draws, so a
/// config with augmentation off leaves the training stream untouched.
std::vector<double> augment(const std::vector<double>& img, TensorShape shape,
                            uint32_t shift_pixels, bool horizontal_flip, Rng& rng);

struct TrainResult {
    Parameters params;
    std::vector<double> loss_history;  // one entry per batch
};

/// Minimizes the N-pair contrastive loss with momentum SGD. Runs
/// epochs * max(1, N_p / (2 * N_c)) batches; each step samples a fresh
/// N-pair batch, runs forward/loss/backward and applies one SGD update.
/// Fully deterministic given (dataset, configs, seed). Throws
/// TrainingDiverged if the loss ever goes non-finite.
TrainResult train(const LabeledDataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg);

}  // namespace pdh
