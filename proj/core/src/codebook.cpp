// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/codebook.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace pdh {

CodeBook::CodeBook(uint32_t bits) : bits_(bits) {
    if (bits == 0) {
        throw std::invalid_argument("CodeBook: bit count must be >= 1");
    }
}

void CodeBook::add(uint64_t id, uint16_t label, HashCode code) {
    if (code.bits() != bits_) {
        throw std::invalid_argument("CodeBook: code length " + std::to_string(code.bits()) +
                                    " does not match book length " + std::to_string(bits_));
    }
    if (!ids_.insert(id).second) {
        throw std::invalid_argument("CodeBook: duplicate id " + std::to_string(id));
    }
    entries_.push_back(CodeEntry{id, label, std::move(code)});
}

std::vector<Neighbor> search_topk(const CodeBook& book, const HashCode& query, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("search_topk: k must be >= 1");
    }
    if (book.empty()) {
        throw std::invalid_argument("search_topk: empty codebook");
    }
    if (query.bits() != book.bits()) {
        throw std::invalid_argument("search_topk: query length " + std::to_string(query.bits()) +
                                    " does not match book length " + std::to_string(book.bits()));
    }

    const auto worse = [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    };

    // Bounded max-heap over (distance, id): keeps the k smallest pairs, which
    // is exactly the prefix of the full (distance, id) sort.
    std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(worse)> heap(worse);
    for (const CodeEntry& entry : book.entries()) {
        Neighbor cand{entry.id, hamming(entry.code, query), entry.label};
        if (heap.size() < k) {
            heap.push(cand);
        } else if (worse(cand, heap.top())) {
            heap.pop();
            heap.push(cand);
        }
    }

    std::vector<Neighbor> result(heap.size());
    for (std::size_t i = result.size(); i-- > 0;) {
        result[i] = heap.top();
        heap.pop();
    }
    return result;
}

}  // namespace pdh
