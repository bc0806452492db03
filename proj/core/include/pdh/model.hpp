// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

#include "pdh/matrix.hpp"
#include "pdh/rng.hpp"

namespace pdh {

enum class LayerKind : uint8_t {
    dense = 0,
    relu = 1,
    conv = 2,     // valid padding, square kernel
    maxpool = 3,  // 2x2, stride 2
};

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    uint32_t out_dim = 0;       // dense only
    uint32_t kernel = 0;        // conv only
    uint32_t out_channels = 0;  // conv only
    uint32_t stride = 1;        // conv only

    static LayerSpec dense_layer(uint32_t out_dim);
    static LayerSpec relu_layer();
    static LayerSpec conv_layer(uint32_t kernel, uint32_t out_channels, uint32_t stride = 1);
    static LayerSpec maxpool_layer();

    bool has_params() const { return kind == LayerKind::dense || kind == LayerKind::conv; }
    bool operator==(const LayerSpec&) const = default;
};

/// Height x width x channels; activations are stored HWC-interleaved,
/// element (y, x, ch) at index (y * w + x) * c + ch. Flat vectors are
/// represented as (1, 1, m).
struct TensorShape {
    uint32_t h = 1;
    uint32_t w = 1;
    uint32_t c = 1;
    uint32_t size() const { return h * w * c; }
    bool operator==(const TensorShape&) const = default;
};

/// Network layout for the likelihood estimator. The final layer must be a
/// dense layer of width code_bits: its raw outputs are the per-bit
/// log-likelihood ratios x(p), and q(p) = 1/(1 + e^x) elementwise.
struct ModelConfig {
    TensorShape input;
    bool flat_input = true;  // kept so checkpoints round-trip byte-exact
    std::vector<LayerSpec> layers;
    uint32_t code_bits = 0;

    /// Throws std::invalid_argument unless every intermediate shape is
    /// consistent and the final layer is dense(code_bits).
    void validate() const;

    /// Output shape after each layer, starting from `input`.
    std::vector<TensorShape> layer_output_shapes() const;

    /// dense(64) -> relu -> dense(n). The reference preset for flat inputs.
    static ModelConfig mlp_small(uint32_t input_dim, uint32_t code_bits);

    /// conv5x5x8 -> relu -> pool -> conv5x5x16 -> relu -> pool ->
    /// dense(64) -> relu -> dense(n). The reference preset for 28x28
    /// grayscale images (any even-multiple shape that survives the shape
    /// walk is accepted).
    static ModelConfig conv_small(uint32_t h, uint32_t w, uint32_t c, uint32_t code_bits);

    bool operator==(const ModelConfig&) const = default;
};

/// Weight and bias tensors for the parameterized layers (dense, conv), in
/// declaration order. Dense: weights out x in, bias 1 x out. Conv: weights
/// out_channels x (kernel * kernel * in_channels) with filter element
/// (ky, kx, ci) at column (ky * kernel + kx) * in_channels + ci; bias
/// 1 x out_channels.
struct Parameters {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    bool operator==(const Parameters&) const = default;
};

/// Per-layer activations cached by forward() for the backward pass.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs;         // input of layer l
    std::vector<std::vector<uint32_t>> pool_argmax;  // winners per maxpool layer, in order
    std::vector<double> logits;
};

/// Fan-in scaled uniform init: weights ~ U[-s, s] with s = sqrt(6 / fan_in)
/// (dense fan_in = in_dim, conv fan_in = kernel^2 * in_channels), biases 0.
/// Draws are consumed in declaration order, row-major, so a seed pins the
/// whole initialization.
Parameters init_params(const ModelConfig& cfg, Rng& rng);

/// Logits for one input tensor. Pure: identical (params, input) give
/// bit-identical logits. If trace is non-null it is filled for backward().
/// Throws on shape mismatch or non-finite input.
std::vector<double> forward(const ModelConfig& cfg, const Parameters& params,
                            const std::vector<double>& input, ForwardTrace* trace = nullptr);

/// Elementwise q_j = 1/(1 + e^{x_j}); always strictly inside (0, 1).
std::vector<double> posteriors(const std::vector<double>& logits);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    static Gradients zeros_like(const Parameters& params);
};

struct ParamShape {
    std::size_t weight_rows;
    std::size_t weight_cols;
    std::size_t bias_len;
};

/// Weight/bias shapes of the parameterized layers, in declaration order.
std::vector<ParamShape> parameter_shapes(const ModelConfig& cfg);

/// Parameters as one flat vector (weights then bias per layer, declaration
/// order, row-major) and back. Gradient checkers perturb the flat view.
std::vector<double> flatten_parameters(const Parameters& params);
Parameters unflatten_parameters(const ModelConfig& cfg, const std::vector<double>& flat);
std::vector<double> flatten_gradients(const Gradients& grads);

/// Accumulates dLoss/dWeights into `grads` given dLoss/dLogits, replaying
/// the layers backward over the cached trace. Throws if the trace does not
/// match the config.
void backward(const ModelConfig& cfg, const Parameters& params, const ForwardTrace& trace,
              const std::vector<double>& grad_wrt_logits, Gradients& grads);

}  // namespace pdh
