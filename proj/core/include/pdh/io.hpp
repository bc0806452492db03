// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdh/codebook.hpp"
#include "pdh/model.hpp"
#include "pdh/trainer.hpp"

namespace pdh::io {

// Binary container formats. All multi-byte fields little-endian unless
// stated otherwise; all writers/readers are byte-exact round trips.
//
// PDHD (datasets):  "PDHD" | version u32 | n_points u32 | shape_tag u8
//                   (0: m u32; 1: h,w,c u32 each) | n_classes u32 |
//                   pixels f32[n_points * dim] | labels u16[n_points]
// PDHM (models):    "PDHM" | version u32 | input_tag u8 (0: m u32;
//                   1: h,w,c u32 each) | code_bits u32 | layer_count u32 |
//                   per layer: tag u8 (0 dense: out u32; 1 relu;
//                   2 conv: kernel,out_channels,stride u32; 3 maxpool) |
//                   then weights+bias per parameterized layer as f64,
//                   row-major, declaration order
// PDHC (codes):     "PDHC" | version u32 | n u32 | count u64 |
//                   per entry: id u64 | label u16 | ceil(n/64) words u64

void write_dataset(const std::string& path, const LabeledDataset& ds);
LabeledDataset read_dataset(const std::string& path);

/// MNIST/IDX ingestion: images file magic 0x00000803, labels file magic
/// 0x00000801, header fields big-endian u32, pixels u8 scaled by 1/255.
LabeledDataset read_mnist_idx(const std::string& images_path, const std::string& labels_path);

struct Checkpoint {
    ModelConfig config;
    Parameters params;
};

void write_checkpoint(const std::string& path, const ModelConfig& cfg, const Parameters& params);
Checkpoint read_checkpoint(const std::string& path);

void write_codebook(const std::string& path, const CodeBook& book);
CodeBook read_codebook(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes; used for input pinning in run
/// manifests.
uint64_t fnv1a_file(const std::string& path);

/// Writes `<output_path>.manifest`: sorted key=value lines covering the
/// command, every resolved flag, the seed, input digests and the artifact
/// version. Equal manifests imply byte-identical outputs.
void write_manifest(const std::string& output_path, const std::string& command,
                    std::vector<std::pair<std::string, std::string>> entries);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace pdh::io
