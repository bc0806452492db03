// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdh/codebook.hpp"

namespace pdh {

struct EvalReport {
    double mean_ap = 0.0;
    std::vector<std::pair<uint32_t, double>> precision_at_k;  // ascending k
    std::vector<double> per_query_ap;                         // non-skipped queries, query order
    std::size_t query_count = 0;
    std::size_t skipped_count = 0;
};

/// Uninterpolated average precision over a full-gallery ranking:
///   AP = (1/R) * sum over relevant ranks t of (relevant count in top t) / t
/// with R the total number of relevant items in the gallery. Returns
/// nullopt when the gallery holds no relevant item at all (the query is
/// skipped, not scored 0).
std::optional<double> average_precision(const std::vector<uint16_t>& ranked_labels,
                                        uint16_t query_label);

/// Fraction of the top min(k, N) ranked items sharing the query label,
/// over a denominator of k (the denominator stays k even when k > N).
double precision_at_k(const std::vector<uint16_t>& ranked_labels, uint16_t query_label,
                      std::size_t k);

struct QueryItem {
    uint16_t label;
    HashCode code;
};

/// Ranks the full gallery for every query by (hamming, id) and aggregates
/// AP and precision@k. The id tiebreak makes the result invariant to
/// gallery insertion order. Queries with no relevant gallery item are
/// excluded from the means and counted in skipped_count; throws DataError
/// if every query is skipped.
EvalReport evaluate(const CodeBook& gallery, const std::vector<QueryItem>& queries,
                    const std::vector<uint32_t>& k_list);

/// Machine-readable lines, exactly: map, p_at_<k> (ascending k), n_queries,
/// n_skipped. One key=value per line, six decimal places.
std::string report_key_values(const EvalReport& report);

/// Human-readable table of the same numbers.
std::string report_table(const EvalReport& report);

}  // namespace pdh
