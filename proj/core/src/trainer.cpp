// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pdh/error.hpp"
#include "pdh/loss.hpp"

namespace pdh {

void LabeledDataset::validate() const {
    if (images.empty()) {
        throw DataError("dataset: no images");
    }
    if (labels.size() != images.size()) {
        throw DataError("dataset: image/label count mismatch");
    }
    if (num_classes == 0) {
        throw DataError("dataset: num_classes must be >= 1");
    }
    if (flat && (shape.h != 1 || shape.w != 1)) {
        throw DataError("dataset: flat data must have shape (1, 1, m)");
    }
    const std::size_t dim = shape.size();
    for (std::size_t k = 0; k < images.size(); ++k) {
        if (images[k].size() != dim) {
            throw DataError("dataset: image " + std::to_string(k) + " has " +
                            std::to_string(images[k].size()) + " values, expected " +
                            std::to_string(dim));
        }
        for (double v : images[k]) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DataError("dataset: image " + std::to_string(k) +
                                " has values outside [0, 1]");
            }
        }
        if (labels[k] >= num_classes) {
            throw DataError("dataset: label " + std::to_string(labels[k]) + " of image " +
                            std::to_string(k) + " out of range");
        }
    }
}

std::vector<std::vector<std::size_t>> LabeledDataset::indices_by_class() const {
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        by_class[labels[k]].push_back(k);
    }
    return by_class;
}

void TrainConfig::validate() const {
    sgd.validate();
    if (code_bits == 0) {
        throw std::invalid_argument("TrainConfig: code_bits must be >= 1");
    }
    if (epochs == 0) {
        throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    }
    if (shift_pixels > 4) {
        throw std::invalid_argument("TrainConfig: shift_pixels must be in 0..4");
    }
}

std::vector<SampledPair> sample_npair_batch(const LabeledDataset& ds, Rng& rng) {
    const auto by_class = ds.indices_by_class();
    std::vector<SampledPair> batch;
    batch.reserve(ds.num_classes);
    for (uint32_t c = 0; c < ds.num_classes; ++c) {
        const auto& pool = by_class[c];
        if (pool.size() < 2) {
            throw DataError("sample_npair_batch: class " + std::to_string(c) + " has " +
                            std::to_string(pool.size()) + " image(s), needs at least 2");
        }
        const std::size_t first = rng.next_below(pool.size());
        std::size_t second = rng.next_below(pool.size() - 1);
        if (second >= first) {
            ++second;  // skip over the anchor: uniform over the remaining m-1
        }
        batch.push_back(SampledPair{pool[first], pool[second]});
    }
    return batch;
}

std::vector<double> shift_image(const std::vector<double>& img, TensorShape shape, int dx,
                                int dy) {
    if (shape.h == 1 && shape.w == 1) {
        return img;
    }
    std::vector<double> out(img.size(), 0.0);
    const int h = static_cast<int>(shape.h);
    const int w = static_cast<int>(shape.w);
    const int c = static_cast<int>(shape.c);
    for (int y = 0; y < h; ++y) {
        const int sy = y - dy;
        if (sy < 0 || sy >= h) {
            continue;
        }
        for (int x = 0; x < w; ++x) {
            const int sx = x - dx;
            if (sx < 0 || sx >= w) {
                continue;
            }
            for (int ch = 0; ch < c; ++ch) {
                out[(static_cast<std::size_t>(y) * w + x) * c + ch] =
                    img[(static_cast<std::size_t>(sy) * w + sx) * c + ch];
            }
        }
    }
    return out;
}

std::vector<double> flip_image_horizontal(const std::vector<double>& img, TensorShape shape) {
    if (shape.h == 1 && shape.w == 1) {
        return img;
    }
    std::vector<double> out(img.size());
    for (uint32_t y = 0; y < shape.h; ++y) {
        for (uint32_t x = 0; x < shape.w; ++x) {
            for (uint32_t ch = 0; ch < shape.c; ++ch) {
                out[(static_cast<std::size_t>(y) * shape.w + x) * shape.c + ch] =
                    img[(static_cast<std::size_t>(y) * shape.w + (shape.w - 1 - x)) * shape.c +
                        ch];
            }
        }
    }
    return out;
}

std::vector<double> augment(const std::vector<double>& img, TensorShape shape,
                            uint32_t shift_pixels, bool horizontal_flip, Rng& rng) {
    std::vector<double> out = img;
    if (shift_pixels > 0) {
        const int span = 2 * static_cast<int>(shift_pixels) + 1;
        const int dx = static_cast<int>(rng.next_below(span)) - static_cast<int>(shift_pixels);
        const int dy = static_cast<int>(rng.next_below(span)) - static_cast<int>(shift_pixels);
        out = shift_image(out, shape, dx, dy);
    }
    if (horizontal_flip && rng.next_coin()) {
        out = flip_image_horizontal(out, shape);
    }
    return out;
}

TrainResult train(const LabeledDataset& ds, const ModelConfig& mcfg, const TrainConfig& tcfg) {
    ds.validate();
    mcfg.validate();
    tcfg.validate();
    if (mcfg.code_bits != tcfg.code_bits) {
        throw std::invalid_argument("train: model code_bits " + std::to_string(mcfg.code_bits) +
                                    " != train config code_bits " +
                                    std::to_string(tcfg.code_bits));
    }
    if (mcfg.input.size() != ds.shape.size()) {
        throw std::invalid_argument("train: model input size does not match dataset");
    }

    Rng rng(tcfg.seed);
    Parameters params = init_params(mcfg, rng);

    std::vector<Matrix> velocity_w;
    std::vector<Matrix> velocity_b;
    for (const Matrix& w : params.weights) {
        velocity_w.emplace_back(w.rows(), w.cols());
    }
    for (const Matrix& b : params.biases) {
        velocity_b.emplace_back(b.rows(), b.cols());
    }

    const std::size_t batch_size = 2 * static_cast<std::size_t>(ds.num_classes);
    std::size_t steps_per_epoch = ds.size() / batch_size;
    if (steps_per_epoch == 0) {
        steps_per_epoch = 1;
    }

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(tcfg.epochs) * steps_per_epoch);

    const bool augmenting = tcfg.shift_pixels > 0 || tcfg.horizontal_flip;
    std::vector<ForwardTrace> anchor_traces(ds.num_classes);
    std::vector<ForwardTrace> positive_traces(ds.num_classes);

    for (uint32_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            const auto pairs = sample_npair_batch(ds, rng);

            PairBatch batch;
            batch.anchors.resize(ds.num_classes);
            batch.positives.resize(ds.num_classes);
            for (uint32_t c = 0; c < ds.num_classes; ++c) {
                std::vector<double> a = ds.images[pairs[c].anchor];
                std::vector<double> p = ds.images[pairs[c].positive];
                if (augmenting) {
                    a = augment(a, ds.shape, tcfg.shift_pixels, tcfg.horizontal_flip, rng);
                    p = augment(p, ds.shape, tcfg.shift_pixels, tcfg.horizontal_flip, rng);
                }
                batch.anchors[c] = posteriors(forward(mcfg, params, a, &anchor_traces[c]));
                batch.positives[c] = posteriors(forward(mcfg, params, p, &positive_traces[c]));
                for (double q : batch.anchors[c]) {
                    if (!std::isfinite(q)) {
                        throw TrainingDiverged("train: non-finite network output at epoch " +
                                               std::to_string(epoch) + ", step " +
                                               std::to_string(step));
                    }
                }
                for (double q : batch.positives[c]) {
                    if (!std::isfinite(q)) {
                        throw TrainingDiverged("train: non-finite network output at epoch " +
                                               std::to_string(epoch) + ", step " +
                                               std::to_string(step));
                    }
                }
            }

            const double loss = npair_contrastive_loss(batch, tcfg.code_bits);
            if (!std::isfinite(loss)) {
                throw TrainingDiverged("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", step " + std::to_string(step));
            }
            result.loss_history.push_back(loss);

            const PairBatchGrads logit_grads = loss_grad_wrt_logits(batch, tcfg.code_bits);
            Gradients grads = Gradients::zeros_like(params);
            for (uint32_t c = 0; c < ds.num_classes; ++c) {
                backward(mcfg, params, anchor_traces[c], logit_grads.anchors[c], grads);
                backward(mcfg, params, positive_traces[c], logit_grads.positives[c], grads);
            }

            sgd_step(params.weights, grads.weights, tcfg.sgd, velocity_w);
            sgd_step(params.biases, grads.biases, tcfg.sgd, velocity_b);
        }
    }

    result.params = std::move(params);
    return result;
}

}  // namespace pdh
