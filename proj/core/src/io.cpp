// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "pdh/error.hpp"
#include "pdh/version.hpp"

namespace pdh::io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open for writing: " + path);
    }
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open for reading: " + path);
    }
    return in;
}

void put_bytes(std::ostream& out, const unsigned char* bytes, std::size_t n) {
    out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
}

void put_u8(std::ostream& out, uint8_t v) { put_bytes(out, &v, 1); }

void put_u16le(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b, 2);
}

void put_u32le(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    put_bytes(out, b, 4);
}

void put_u64le(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    put_bytes(out, b, 8);
}

void put_f32le(std::ostream& out, float v) { put_u32le(out, std::bit_cast<uint32_t>(v)); }
void put_f64le(std::ostream& out, double v) { put_u64le(out, std::bit_cast<uint64_t>(v)); }

void get_bytes(std::istream& in, unsigned char* bytes, std::size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(bytes), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw DataError(std::string("truncated file while reading ") + what);
    }
}

uint8_t get_u8(std::istream& in, const char* what) {
    unsigned char b;
    get_bytes(in, &b, 1, what);
    return b;
}

uint16_t get_u16le(std::istream& in, const char* what) {
    unsigned char b[2];
    get_bytes(in, b, 2, what);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32le(std::istream& in, const char* what) {
    unsigned char b[4];
    get_bytes(in, b, 4, what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64le(std::istream& in, const char* what) {
    uint64_t v = 0;
    unsigned char b[8];
    get_bytes(in, b, 8, what);
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

float get_f32le(std::istream& in, const char* what) {
    return std::bit_cast<float>(get_u32le(in, what));
}

double get_f64le(std::istream& in, const char* what) {
    return std::bit_cast<double>(get_u64le(in, what));
}

uint32_t get_u32be(std::istream& in, const char* what) {
    unsigned char b[4];
    get_bytes(in, b, 4, what);
    return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
           (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

void check_magic(std::istream& in, const char* magic, const std::string& path) {
    unsigned char b[4];
    get_bytes(in, b, 4, "magic");
    for (int i = 0; i < 4; ++i) {
        if (b[i] != static_cast<unsigned char>(magic[i])) {
            throw DataError(path + ": bad magic, expected " + magic);
        }
    }
}

constexpr uint32_t kFormatVersion = 1;

}  // namespace

void write_dataset(const std::string& path, const LabeledDataset& ds) {
    ds.validate();
    auto out = open_out(path);
    out.write("PDHD", 4);
    put_u32le(out, kFormatVersion);
    put_u32le(out, static_cast<uint32_t>(ds.size()));
    if (ds.flat) {
        put_u8(out, 0);
        put_u32le(out, ds.shape.c);
    } else {
        put_u8(out, 1);
        put_u32le(out, ds.shape.h);
        put_u32le(out, ds.shape.w);
        put_u32le(out, ds.shape.c);
    }
    put_u32le(out, ds.num_classes);
    for (const auto& img : ds.images) {
        for (double v : img) {
            put_f32le(out, static_cast<float>(v));
        }
    }
    for (uint16_t label : ds.labels) {
        put_u16le(out, label);
    }
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

LabeledDataset read_dataset(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "PDHD", path);
    const uint32_t version = get_u32le(in, "version");
    if (version != kFormatVersion) {
        throw DataError(path + ": unsupported PDHD version " + std::to_string(version));
    }
    LabeledDataset ds;
    const uint32_t n_points = get_u32le(in, "point count");
    const uint8_t shape_tag = get_u8(in, "shape tag");
    if (shape_tag == 0) {
        ds.flat = true;
        ds.shape = TensorShape{1, 1, get_u32le(in, "flat dim")};
    } else if (shape_tag == 1) {
        ds.flat = false;
        const uint32_t h = get_u32le(in, "height");
        const uint32_t w = get_u32le(in, "width");
        const uint32_t c = get_u32le(in, "channels");
        ds.shape = TensorShape{h, w, c};
    } else {
        throw DataError(path + ": unknown shape tag " + std::to_string(shape_tag));
    }
    ds.num_classes = get_u32le(in, "class count");
    const std::size_t dim = ds.shape.size();
    ds.images.assign(n_points, std::vector<double>(dim));
    for (auto& img : ds.images) {
        for (auto& v : img) {
            v = static_cast<double>(get_f32le(in, "pixels"));
        }
    }
    ds.labels.resize(n_points);
    for (auto& label : ds.labels) {
        label = get_u16le(in, "labels");
    }
    ds.validate();
    return ds;
}

LabeledDataset read_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    auto imgs = open_in(images_path);
    if (get_u32be(imgs, "image magic") != 0x00000803u) {
        throw DataError(images_path + ": not an IDX3 ubyte image file");
    }
    const uint32_t n_images = get_u32be(imgs, "image count");
    const uint32_t rows = get_u32be(imgs, "rows");
    const uint32_t cols = get_u32be(imgs, "cols");
    if (n_images == 0 || rows == 0 || cols == 0) {
        throw DataError(images_path + ": empty image file");
    }

    auto labs = open_in(labels_path);
    if (get_u32be(labs, "label magic") != 0x00000801u) {
        throw DataError(labels_path + ": not an IDX1 ubyte label file");
    }
    const uint32_t n_labels = get_u32be(labs, "label count");
    if (n_labels != n_images) {
        throw DataError("IDX pair mismatch: " + std::to_string(n_images) + " images vs " +
                        std::to_string(n_labels) + " labels");
    }

    LabeledDataset ds;
    ds.flat = false;
    ds.shape = TensorShape{rows, cols, 1};
    ds.images.assign(n_images, std::vector<double>(ds.shape.size()));
    std::vector<unsigned char> buf(ds.shape.size());
    for (auto& img : ds.images) {
        get_bytes(imgs, buf.data(), buf.size(), "pixels");
        for (std::size_t i = 0; i < buf.size(); ++i) {
            img[i] = static_cast<double>(buf[i]) / 255.0;
        }
    }
    ds.labels.resize(n_images);
    uint16_t max_label = 0;
    for (auto& label : ds.labels) {
        label = get_u8(labs, "labels");
        max_label = std::max(max_label, label);
    }
    ds.num_classes = static_cast<uint32_t>(max_label) + 1;
    ds.validate();
    return ds;
}

void write_checkpoint(const std::string& path, const ModelConfig& cfg, const Parameters& params) {
    cfg.validate();
    const auto shapes = parameter_shapes(cfg);
    if (params.weights.size() != shapes.size() || params.biases.size() != shapes.size()) {
        throw std::invalid_argument("write_checkpoint: parameters do not match config");
    }
    auto out = open_out(path);
    out.write("PDHM", 4);
    put_u32le(out, kFormatVersion);
    if (cfg.flat_input) {
        put_u8(out, 0);
        put_u32le(out, cfg.input.c);
    } else {
        put_u8(out, 1);
        put_u32le(out, cfg.input.h);
        put_u32le(out, cfg.input.w);
        put_u32le(out, cfg.input.c);
    }
    put_u32le(out, cfg.code_bits);
    put_u32le(out, static_cast<uint32_t>(cfg.layers.size()));
    for (const LayerSpec& layer : cfg.layers) {
        put_u8(out, static_cast<uint8_t>(layer.kind));
        switch (layer.kind) {
            case LayerKind::dense:
                put_u32le(out, layer.out_dim);
                break;
            case LayerKind::conv:
                put_u32le(out, layer.kernel);
                put_u32le(out, layer.out_channels);
                put_u32le(out, layer.stride);
                break;
            case LayerKind::relu:
            case LayerKind::maxpool:
                break;
        }
    }
    for (std::size_t t = 0; t < params.weights.size(); ++t) {
        for (double v : params.weights[t].values()) {
            put_f64le(out, v);
        }
        for (double v : params.biases[t].values()) {
            put_f64le(out, v);
        }
    }
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "PDHM", path);
    const uint32_t version = get_u32le(in, "version");
    if (version != kFormatVersion) {
        throw DataError(path + ": unsupported PDHM version " + std::to_string(version));
    }
    Checkpoint ckpt;
    const uint8_t input_tag = get_u8(in, "input tag");
    if (input_tag == 0) {
        ckpt.config.flat_input = true;
        ckpt.config.input = TensorShape{1, 1, get_u32le(in, "flat dim")};
    } else if (input_tag == 1) {
        ckpt.config.flat_input = false;
        const uint32_t h = get_u32le(in, "height");
        const uint32_t w = get_u32le(in, "width");
        const uint32_t c = get_u32le(in, "channels");
        ckpt.config.input = TensorShape{h, w, c};
    } else {
        throw DataError(path + ": unknown input tag " + std::to_string(input_tag));
    }
    ckpt.config.code_bits = get_u32le(in, "code bits");
    const uint32_t layer_count = get_u32le(in, "layer count");
    for (uint32_t l = 0; l < layer_count; ++l) {
        const uint8_t tag = get_u8(in, "layer tag");
        switch (tag) {
            case 0:
                ckpt.config.layers.push_back(LayerSpec::dense_layer(get_u32le(in, "dense width")));
                break;
            case 1:
                ckpt.config.layers.push_back(LayerSpec::relu_layer());
                break;
            case 2: {
                const uint32_t kernel = get_u32le(in, "conv kernel");
                const uint32_t channels = get_u32le(in, "conv channels");
                const uint32_t stride = get_u32le(in, "conv stride");
                ckpt.config.layers.push_back(LayerSpec::conv_layer(kernel, channels, stride));
                break;
            }
            case 3:
                ckpt.config.layers.push_back(LayerSpec::maxpool_layer());
                break;
            default:
                throw DataError(path + ": unknown layer tag " + std::to_string(tag));
        }
    }
    try {
        ckpt.config.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": invalid model config: " + e.what());
    }
    for (const ParamShape& shape : parameter_shapes(ckpt.config)) {
        std::vector<double> w(shape.weight_rows * shape.weight_cols);
        for (auto& v : w) {
            v = get_f64le(in, "weights");
        }
        std::vector<double> b(shape.bias_len);
        for (auto& v : b) {
            v = get_f64le(in, "bias");
        }
        try {
            ckpt.params.weights.emplace_back(shape.weight_rows, shape.weight_cols, std::move(w));
            ckpt.params.biases.emplace_back(1, shape.bias_len, std::move(b));
        } catch (const std::invalid_argument& e) {
            throw DataError(path + ": invalid parameters: " + e.what());
        }
    }
    return ckpt;
}

void write_codebook(const std::string& path, const CodeBook& book) {
    auto out = open_out(path);
    out.write("PDHC", 4);
    put_u32le(out, kFormatVersion);
    put_u32le(out, book.bits());
    put_u64le(out, book.size());
    for (const CodeEntry& entry : book.entries()) {
        put_u64le(out, entry.id);
        put_u16le(out, entry.label);
        for (uint64_t word : entry.code.words()) {
            put_u64le(out, word);
        }
    }
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

CodeBook read_codebook(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "PDHC", path);
    const uint32_t version = get_u32le(in, "version");
    if (version != kFormatVersion) {
        throw DataError(path + ": unsupported PDHC version " + std::to_string(version));
    }
    const uint32_t bits = get_u32le(in, "code bits");
    if (bits == 0) {
        throw DataError(path + ": zero code length");
    }
    const uint64_t count = get_u64le(in, "entry count");
    CodeBook book(bits);
    const std::size_t n_words = (static_cast<std::size_t>(bits) + 63) / 64;
    for (uint64_t e = 0; e < count; ++e) {
        const uint64_t id = get_u64le(in, "entry id");
        const uint16_t label = get_u16le(in, "entry label");
        std::vector<uint64_t> words(n_words);
        for (auto& word : words) {
            word = get_u64le(in, "code words");
        }
        try {
            book.add(id, label, HashCode(bits, std::move(words)));
        } catch (const std::invalid_argument& e2) {
            throw DataError(path + ": " + e2.what());
        }
    }
    return book;
}

uint64_t fnv1a_file(const std::string& path) {
    auto in = open_in(path);
    uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

void write_manifest(const std::string& output_path, const std::string& command,
                    std::vector<std::pair<std::string, std::string>> entries) {
    entries.emplace_back("artifact_version", kArtifactVersion);
    entries.emplace_back("command", command);
    std::sort(entries.begin(), entries.end());
    std::string text;
    for (const auto& [key, value] : entries) {
        text += key;
        text += '=';
        text += value;
        text += '\n';
    }
    write_text_file(output_path + ".manifest", text);
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

}  // namespace pdh::io
