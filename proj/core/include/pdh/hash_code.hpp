// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <vector>

namespace pdh {

/// Fixed-length binary code packed into 64-bit words. Bit j lives in
/// words[j / 64] at position (j % 64), LSB first; pad bits above the code
/// length are always zero. The packing is normative: code files written on
/// one machine are byte-exact on another.
class HashCode {
public:
    explicit HashCode(uint32_t bits);
    HashCode(uint32_t bits, std::vector<uint64_t> words);  // validates pad bits

    uint32_t bits() const { return bits_; }
    std::size_t word_count() const { return words_.size(); }
    const std::vector<uint64_t>& words() const { return words_; }

    bool bit(uint32_t j) const;
    void set_bit(uint32_t j, bool value);

    bool operator==(const HashCode& other) const = default;

private:
    uint32_t bits_ = 0;
    std::vector<uint64_t> words_;
};

/// Hamming distance as a sum of per-word popcount(xor). Throws if the code
/// lengths differ.
uint32_t hamming(const HashCode& a, const HashCode& b);

/// Threshold binarization: bit j = 1 iff q[j] >= 0.5. The tie 0.5 -> 1 is
/// deliberate and load-bearing: it is what makes thresholded Hamming
/// distance equal the MAP estimate of the hash distance.
HashCode binarize(const std::vector<double>& posteriors);

/// MAP hash distance between two posterior vectors: hamming of the two
/// thresholded codes. Equals the per-bit argmax of
/// Pr(|h_j - h'_j| | p, p') summed over bits, except on the measure-zero
/// boundary q = q' = 0.5 exactly.
uint32_t map_distance(const std::vector<double>& q, const std::vector<double>& q_prime);

}  // namespace pdh
