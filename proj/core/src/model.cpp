// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pdh/sigmoid.hpp"

namespace pdh {

LayerSpec LayerSpec::dense_layer(uint32_t out_dim) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.out_dim = out_dim;
    return s;
}

LayerSpec LayerSpec::relu_layer() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec LayerSpec::conv_layer(uint32_t kernel, uint32_t out_channels, uint32_t stride) {
    LayerSpec s;
    s.kind = LayerKind::conv;
    s.kernel = kernel;
    s.out_channels = out_channels;
    s.stride = stride;
    return s;
}

LayerSpec LayerSpec::maxpool_layer() {
    LayerSpec s;
    s.kind = LayerKind::maxpool;
    return s;
}

std::vector<TensorShape> ModelConfig::layer_output_shapes() const {
    std::vector<TensorShape> shapes;
    shapes.reserve(layers.size());
    TensorShape cur = input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& spec = layers[l];
        switch (spec.kind) {
            case LayerKind::dense:
                if (spec.out_dim == 0) {
                    throw std::invalid_argument("ModelConfig: dense layer with zero width");
                }
                cur = TensorShape{1, 1, spec.out_dim};
                break;
            case LayerKind::relu:
                break;
            case LayerKind::conv: {
                if (spec.kernel == 0 || spec.out_channels == 0 || spec.stride == 0) {
                    throw std::invalid_argument("ModelConfig: malformed conv layer");
                }
                if (cur.h < spec.kernel || cur.w < spec.kernel) {
                    throw std::invalid_argument("ModelConfig: conv kernel " +
                                                std::to_string(spec.kernel) +
                                                " larger than input " + std::to_string(cur.h) +
                                                "x" + std::to_string(cur.w) + " at layer " +
                                                std::to_string(l));
                }
                cur = TensorShape{(cur.h - spec.kernel) / spec.stride + 1,
                                  (cur.w - spec.kernel) / spec.stride + 1, spec.out_channels};
                break;
            }
            case LayerKind::maxpool:
                if (cur.h < 2 || cur.w < 2 || cur.h % 2 != 0 || cur.w % 2 != 0) {
                    throw std::invalid_argument(
                        "ModelConfig: maxpool needs even spatial dims, got " +
                        std::to_string(cur.h) + "x" + std::to_string(cur.w) + " at layer " +
                        std::to_string(l));
                }
                cur = TensorShape{cur.h / 2, cur.w / 2, cur.c};
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

void ModelConfig::validate() const {
    if (input.size() == 0) {
        throw std::invalid_argument("ModelConfig: empty input shape");
    }
    if (layers.empty()) {
        throw std::invalid_argument("ModelConfig: no layers");
    }
    if (code_bits == 0) {
        throw std::invalid_argument("ModelConfig: code_bits must be >= 1");
    }
    const auto shapes = layer_output_shapes();  // throws on inconsistent shapes
    const LayerSpec& last = layers.back();
    if (last.kind != LayerKind::dense || last.out_dim != code_bits) {
        throw std::invalid_argument("ModelConfig: final layer must be dense(code_bits)");
    }
    (void)shapes;
}

ModelConfig ModelConfig::mlp_small(uint32_t input_dim, uint32_t code_bits) {
    ModelConfig cfg;
    cfg.input = TensorShape{1, 1, input_dim};
    cfg.flat_input = true;
    cfg.code_bits = code_bits;
    cfg.layers = {LayerSpec::dense_layer(64), LayerSpec::relu_layer(),
                  LayerSpec::dense_layer(code_bits)};
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::conv_small(uint32_t h, uint32_t w, uint32_t c, uint32_t code_bits) {
    ModelConfig cfg;
    cfg.input = TensorShape{h, w, c};
    cfg.flat_input = false;
    cfg.code_bits = code_bits;
    cfg.layers = {LayerSpec::conv_layer(5, 8),  LayerSpec::relu_layer(),
                  LayerSpec::maxpool_layer(),   LayerSpec::conv_layer(5, 16),
                  LayerSpec::relu_layer(),      LayerSpec::maxpool_layer(),
                  LayerSpec::dense_layer(64),   LayerSpec::relu_layer(),
                  LayerSpec::dense_layer(code_bits)};
    cfg.validate();
    return cfg;
}

std::vector<ParamShape> parameter_shapes(const ModelConfig& cfg) {
    std::vector<ParamShape> out;
    TensorShape cur = cfg.input;
    for (const LayerSpec& spec : cfg.layers) {
        switch (spec.kind) {
            case LayerKind::dense:
                out.push_back({spec.out_dim, cur.size(), spec.out_dim});
                cur = TensorShape{1, 1, spec.out_dim};
                break;
            case LayerKind::relu:
                break;
            case LayerKind::conv:
                out.push_back({spec.out_channels,
                               static_cast<std::size_t>(spec.kernel) * spec.kernel * cur.c,
                               spec.out_channels});
                cur = TensorShape{(cur.h - spec.kernel) / spec.stride + 1,
                                  (cur.w - spec.kernel) / spec.stride + 1, spec.out_channels};
                break;
            case LayerKind::maxpool:
                cur = TensorShape{cur.h / 2, cur.w / 2, cur.c};
                break;
        }
    }
    return out;
}

namespace {

void check_params_match(const ModelConfig& cfg, const Parameters& params) {
    const auto shapes = parameter_shapes(cfg);
    if (params.weights.size() != shapes.size() || params.biases.size() != shapes.size()) {
        throw std::invalid_argument("model: parameter tensor count does not match config");
    }
    for (std::size_t t = 0; t < shapes.size(); ++t) {
        if (params.weights[t].rows() != shapes[t].weight_rows ||
            params.weights[t].cols() != shapes[t].weight_cols ||
            params.biases[t].cols() != shapes[t].bias_len || params.biases[t].rows() != 1) {
            throw std::invalid_argument("model: parameter shape mismatch at tensor " +
                                        std::to_string(t));
        }
    }
}

std::vector<double> forward_dense(const Matrix& w, const Matrix& b,
                                  const std::vector<double>& in) {
    std::vector<double> out(w.rows());
    for (std::size_t o = 0; o < w.rows(); ++o) {
        double acc = b.at(0, o);
        for (std::size_t i = 0; i < w.cols(); ++i) {
            acc += w.at(o, i) * in[i];
        }
        out[o] = acc;
    }
    return out;
}

std::vector<double> forward_conv(const LayerSpec& spec, const Matrix& w, const Matrix& b,
                                 const std::vector<double>& in, TensorShape is, TensorShape os) {
    std::vector<double> out(os.size());
    const uint32_t k = spec.kernel;
    const uint32_t s = spec.stride;
    for (uint32_t oy = 0; oy < os.h; ++oy) {
        for (uint32_t ox = 0; ox < os.w; ++ox) {
            for (uint32_t f = 0; f < os.c; ++f) {
                double acc = b.at(0, f);
                for (uint32_t ky = 0; ky < k; ++ky) {
                    for (uint32_t kx = 0; kx < k; ++kx) {
                        const std::size_t in_base =
                            (static_cast<std::size_t>(oy * s + ky) * is.w + (ox * s + kx)) * is.c;
                        const std::size_t w_base = (static_cast<std::size_t>(ky) * k + kx) * is.c;
                        for (uint32_t ci = 0; ci < is.c; ++ci) {
                            acc += in[in_base + ci] * w.at(f, w_base + ci);
                        }
                    }
                }
                out[(static_cast<std::size_t>(oy) * os.w + ox) * os.c + f] = acc;
            }
        }
    }
    return out;
}

std::vector<double> forward_maxpool(const std::vector<double>& in, TensorShape is, TensorShape os,
                                    std::vector<uint32_t>* argmax) {
    std::vector<double> out(os.size());
    if (argmax) {
        argmax->assign(os.size(), 0);
    }
    for (uint32_t oy = 0; oy < os.h; ++oy) {
        for (uint32_t ox = 0; ox < os.w; ++ox) {
            for (uint32_t ch = 0; ch < os.c; ++ch) {
                uint32_t best_idx = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (uint32_t dy = 0; dy < 2; ++dy) {
                    for (uint32_t dx = 0; dx < 2; ++dx) {
                        const uint32_t idx =
                            ((oy * 2 + dy) * is.w + (ox * 2 + dx)) * is.c + ch;
                        if (in[idx] > best) {  // first winner kept on ties
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                }
                const std::size_t out_idx = (static_cast<std::size_t>(oy) * os.w + ox) * os.c + ch;
                out[out_idx] = best;
                if (argmax) {
                    (*argmax)[out_idx] = best_idx;
                }
            }
        }
    }
    return out;
}

}  // namespace

Parameters init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    Parameters params;
    for (const ParamShape& shape : parameter_shapes(cfg)) {
        const double s = std::sqrt(6.0 / static_cast<double>(shape.weight_cols));
        Matrix w(shape.weight_rows, shape.weight_cols);
        for (double& v : w.values()) {
            v = rng.uniform(-s, s);
        }
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(1, shape.bias_len);
    }
    return params;
}

std::vector<double> forward(const ModelConfig& cfg, const Parameters& params,
                            const std::vector<double>& input, ForwardTrace* trace) {
    cfg.validate();
    check_params_match(cfg, params);
    if (input.size() != cfg.input.size()) {
        throw std::invalid_argument("forward: input size " + std::to_string(input.size()) +
                                    " does not match config input " +
                                    std::to_string(cfg.input.size()));
    }
    for (double v : input) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("forward: non-finite input");
        }
    }

    if (trace) {
        trace->inputs.clear();
        trace->pool_argmax.clear();
        trace->logits.clear();
    }

    const auto shapes = cfg.layer_output_shapes();
    std::vector<double> cur = input;
    TensorShape cur_shape = cfg.input;
    std::size_t param_idx = 0;
    for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
        const LayerSpec& spec = cfg.layers[l];
        if (trace) {
            trace->inputs.push_back(cur);
        }
        switch (spec.kind) {
            case LayerKind::dense:
                cur = forward_dense(params.weights[param_idx], params.biases[param_idx], cur);
                ++param_idx;
                break;
            case LayerKind::relu:
                for (double& v : cur) {
                    if (v < 0.0) {
                        v = 0.0;
                    }
                }
                break;
            case LayerKind::conv:
                cur = forward_conv(spec, params.weights[param_idx], params.biases[param_idx], cur,
                                   cur_shape, shapes[l]);
                ++param_idx;
                break;
            case LayerKind::maxpool: {
                std::vector<uint32_t> argmax;
                cur = forward_maxpool(cur, cur_shape, shapes[l], trace ? &argmax : nullptr);
                if (trace) {
                    trace->pool_argmax.push_back(std::move(argmax));
                }
                break;
            }
        }
        cur_shape = shapes[l];
    }
    if (trace) {
        trace->logits = cur;
    }
    return cur;
}

std::vector<double> posteriors(const std::vector<double>& logits) {
    std::vector<double> q(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        q[j] = stable_sigmoid(logits[j]);
    }
    return q;
}

Gradients Gradients::zeros_like(const Parameters& params) {
    Gradients g;
    for (const Matrix& w : params.weights) {
        g.weights.emplace_back(w.rows(), w.cols());
    }
    for (const Matrix& b : params.biases) {
        g.biases.emplace_back(b.rows(), b.cols());
    }
    return g;
}

void backward(const ModelConfig& cfg, const Parameters& params, const ForwardTrace& trace,
              const std::vector<double>& grad_wrt_logits, Gradients& grads) {
    check_params_match(cfg, params);
    if (trace.inputs.size() != cfg.layers.size()) {
        throw std::invalid_argument("backward: trace does not match config layer count");
    }
    if (grad_wrt_logits.size() != cfg.code_bits) {
        throw std::invalid_argument("backward: upstream gradient length mismatch");
    }
    if (grads.weights.size() != params.weights.size() ||
        grads.biases.size() != params.biases.size()) {
        throw std::invalid_argument("backward: gradient accumulator shape mismatch");
    }

    const auto shapes = cfg.layer_output_shapes();
    std::size_t param_idx = params.weights.size();
    std::size_t pool_idx = trace.pool_argmax.size();

    std::vector<double> g = grad_wrt_logits;
    for (std::size_t l = cfg.layers.size(); l-- > 0;) {
        const LayerSpec& spec = cfg.layers[l];
        const std::vector<double>& in = trace.inputs[l];
        const TensorShape in_shape = l == 0 ? cfg.input : shapes[l - 1];
        const TensorShape out_shape = shapes[l];
        if (g.size() != out_shape.size()) {
            throw std::invalid_argument("backward: trace activation shape mismatch at layer " +
                                        std::to_string(l));
        }
        switch (spec.kind) {
            case LayerKind::dense: {
                --param_idx;
                const Matrix& w = params.weights[param_idx];
                Matrix& dw = grads.weights[param_idx];
                Matrix& db = grads.biases[param_idx];
                if (in.size() != w.cols()) {
                    throw std::invalid_argument("backward: trace input shape mismatch");
                }
                std::vector<double> din(w.cols(), 0.0);
                for (std::size_t o = 0; o < w.rows(); ++o) {
                    const double go = g[o];
                    db.at(0, o) += go;
                    for (std::size_t i = 0; i < w.cols(); ++i) {
                        dw.at(o, i) += go * in[i];
                        din[i] += w.at(o, i) * go;
                    }
                }
                g = std::move(din);
                break;
            }
            case LayerKind::relu: {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (in[i] <= 0.0) {  // derivative at 0 taken as 0
                        g[i] = 0.0;
                    }
                }
                break;
            }
            case LayerKind::conv: {
                --param_idx;
                const Matrix& w = params.weights[param_idx];
                Matrix& dw = grads.weights[param_idx];
                Matrix& db = grads.biases[param_idx];
                const uint32_t k = spec.kernel;
                const uint32_t s = spec.stride;
                std::vector<double> din(in.size(), 0.0);
                for (uint32_t oy = 0; oy < out_shape.h; ++oy) {
                    for (uint32_t ox = 0; ox < out_shape.w; ++ox) {
                        for (uint32_t f = 0; f < out_shape.c; ++f) {
                            const double go =
                                g[(static_cast<std::size_t>(oy) * out_shape.w + ox) * out_shape.c +
                                  f];
                            db.at(0, f) += go;
                            for (uint32_t ky = 0; ky < k; ++ky) {
                                for (uint32_t kx = 0; kx < k; ++kx) {
                                    const std::size_t in_base =
                                        (static_cast<std::size_t>(oy * s + ky) * in_shape.w +
                                         (ox * s + kx)) *
                                        in_shape.c;
                                    const std::size_t w_base =
                                        (static_cast<std::size_t>(ky) * k + kx) * in_shape.c;
                                    for (uint32_t ci = 0; ci < in_shape.c; ++ci) {
                                        dw.at(f, w_base + ci) += go * in[in_base + ci];
                                        din[in_base + ci] += go * w.at(f, w_base + ci);
                                    }
                                }
                            }
                        }
                    }
                }
                g = std::move(din);
                break;
            }
            case LayerKind::maxpool: {
                --pool_idx;
                const std::vector<uint32_t>& argmax = trace.pool_argmax[pool_idx];
                if (argmax.size() != g.size()) {
                    throw std::invalid_argument("backward: pool trace shape mismatch");
                }
                std::vector<double> din(in.size(), 0.0);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    din[argmax[i]] += g[i];
                }
                g = std::move(din);
                break;
            }
        }
    }
}

std::vector<double> flatten_parameters(const Parameters& params) {
    std::vector<double> flat;
    for (std::size_t t = 0; t < params.weights.size(); ++t) {
        const auto& w = params.weights[t].values();
        flat.insert(flat.end(), w.begin(), w.end());
        const auto& b = params.biases[t].values();
        flat.insert(flat.end(), b.begin(), b.end());
    }
    return flat;
}

Parameters unflatten_parameters(const ModelConfig& cfg, const std::vector<double>& flat) {
    Parameters params;
    std::size_t pos = 0;
    for (const ParamShape& shape : parameter_shapes(cfg)) {
        const std::size_t w_len = shape.weight_rows * shape.weight_cols;
        if (pos + w_len + shape.bias_len > flat.size()) {
            throw std::invalid_argument("unflatten_parameters: flat vector too short");
        }
        params.weights.emplace_back(
            shape.weight_rows, shape.weight_cols,
            std::vector<double>(flat.begin() + pos, flat.begin() + pos + w_len));
        pos += w_len;
        params.biases.emplace_back(
            1, shape.bias_len,
            std::vector<double>(flat.begin() + pos, flat.begin() + pos + shape.bias_len));
        pos += shape.bias_len;
    }
    if (pos != flat.size()) {
        throw std::invalid_argument("unflatten_parameters: flat vector too long");
    }
    return params;
}

std::vector<double> flatten_gradients(const Gradients& grads) {
    std::vector<double> flat;
    for (std::size_t t = 0; t < grads.weights.size(); ++t) {
        const auto& w = grads.weights[t].values();
        flat.insert(flat.end(), w.begin(), w.end());
        const auto& b = grads.biases[t].values();
        flat.insert(flat.end(), b.begin(), b.end());
    }
    return flat;
}

}  // namespace pdh

