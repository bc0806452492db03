// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "pdh/hash_code.hpp"

namespace pdh {

struct CodeEntry {
    uint64_t id;
    uint16_t label;
    HashCode code;
};

struct Neighbor {
    uint64_t id;
    uint32_t distance;
    uint16_t label;
};

/// Immutable-after-construction gallery of hash codes. Ids are unique and
/// every code has the same length; both are enforced on insertion.
class CodeBook {
public:
    explicit CodeBook(uint32_t bits);

    void add(uint64_t id, uint16_t label, HashCode code);

    uint32_t bits() const { return bits_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<CodeEntry>& entries() const { return entries_; }

private:
    uint32_t bits_;
    std::vector<CodeEntry> entries_;
    std::unordered_set<uint64_t> ids_;
};

/// Exact k-nearest-neighbor search by linear scan with word-level popcount.
/// Results are sorted by (distance asc, id asc); the id tiebreak makes the
/// ranking canonical regardless of gallery insertion order. Returns all
/// entries when k >= book size.
std::vector<Neighbor> search_topk(const CodeBook& book, const HashCode& query, std::size_t k);

}  // namespace pdh
