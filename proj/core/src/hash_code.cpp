// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/hash_code.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace pdh {

namespace {

std::size_t words_for(uint32_t bits) { return (static_cast<std::size_t>(bits) + 63) / 64; }

uint64_t pad_mask(uint32_t bits) {
    const uint32_t used = bits % 64;
    return used == 0 ? ~0ULL : ((1ULL << used) - 1);
}

}  // namespace

HashCode::HashCode(uint32_t bits) : bits_(bits), words_(words_for(bits), 0) {
    if (bits == 0) {
        throw std::invalid_argument("HashCode: bit count must be >= 1");
    }
}

HashCode::HashCode(uint32_t bits, std::vector<uint64_t> words)
    : bits_(bits), words_(std::move(words)) {
    if (bits == 0) {
        throw std::invalid_argument("HashCode: bit count must be >= 1");
    }
    if (words_.size() != words_for(bits)) {
        throw std::invalid_argument("HashCode: word count does not match bit count");
    }
    if ((words_.back() & ~pad_mask(bits_)) != 0) {
        throw std::invalid_argument("HashCode: nonzero pad bits above bit " +
                                    std::to_string(bits_ - 1));
    }
}

bool HashCode::bit(uint32_t j) const {
    if (j >= bits_) {
        throw std::out_of_range("HashCode: bit index out of range");
    }
    return (words_[j / 64] >> (j % 64)) & 1ULL;
}

void HashCode::set_bit(uint32_t j, bool value) {
    if (j >= bits_) {
        throw std::out_of_range("HashCode: bit index out of range");
    }
    const uint64_t mask = 1ULL << (j % 64);
    if (value) {
        words_[j / 64] |= mask;
    } else {
        words_[j / 64] &= ~mask;
    }
}

uint32_t hamming(const HashCode& a, const HashCode& b) {
    if (a.bits() != b.bits()) {
        throw std::invalid_argument("hamming: code lengths differ, " + std::to_string(a.bits()) +
                                    " vs " + std::to_string(b.bits()));
    }
    uint32_t dist = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) {
        dist += static_cast<uint32_t>(std::popcount(wa[i] ^ wb[i]));
    }
    return dist;
}

HashCode binarize(const std::vector<double>& posteriors) {
    HashCode code(static_cast<uint32_t>(posteriors.size()));
    for (uint32_t j = 0; j < posteriors.size(); ++j) {
        if (posteriors[j] >= 0.5) {
            code.set_bit(j, true);
        }
    }
    return code;
}

uint32_t map_distance(const std::vector<double>& q, const std::vector<double>& q_prime) {
    if (q.size() != q_prime.size()) {
        throw std::invalid_argument("map_distance: posterior lengths differ");
    }
    return hamming(binarize(q), binarize(q_prime));
}

}  // namespace pdh
