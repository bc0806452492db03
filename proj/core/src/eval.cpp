// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include "pdh/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "pdh/error.hpp"

namespace pdh {

std::optional<double> average_precision(const std::vector<uint16_t>& ranked_labels,
                                        uint16_t query_label) {
    if (ranked_labels.empty()) {
        throw std::invalid_argument("average_precision: empty ranking");
    }
    std::size_t total_relevant = 0;
    for (uint16_t label : ranked_labels) {
        if (label == query_label) {
            ++total_relevant;
        }
    }
    if (total_relevant == 0) {
        return std::nullopt;
    }
    double sum = 0.0;
    std::size_t seen_relevant = 0;
    for (std::size_t t = 0; t < ranked_labels.size(); ++t) {
        if (ranked_labels[t] == query_label) {
            ++seen_relevant;
            sum += static_cast<double>(seen_relevant) / static_cast<double>(t + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

double precision_at_k(const std::vector<uint16_t>& ranked_labels, uint16_t query_label,
                      std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("precision_at_k: k must be >= 1");
    }
    const std::size_t cutoff = std::min(k, ranked_labels.size());
    std::size_t relevant = 0;
    for (std::size_t t = 0; t < cutoff; ++t) {
        if (ranked_labels[t] == query_label) {
            ++relevant;
        }
    }
    return static_cast<double>(relevant) / static_cast<double>(k);
}

EvalReport evaluate(const CodeBook& gallery, const std::vector<QueryItem>& queries,
                    const std::vector<uint32_t>& k_list) {
    if (gallery.empty()) {
        throw std::invalid_argument("evaluate: empty gallery");
    }
    if (queries.empty()) {
        throw std::invalid_argument("evaluate: no queries");
    }
    std::vector<uint32_t> ks = k_list;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (uint32_t k : ks) {
        if (k == 0) {
            throw std::invalid_argument("evaluate: k must be >= 1");
        }
    }

    EvalReport report;
    report.query_count = queries.size();
    std::vector<double> p_at_k_sum(ks.size(), 0.0);

    for (const QueryItem& query : queries) {
        const auto ranking = search_topk(gallery, query.code, gallery.size());
        std::vector<uint16_t> ranked_labels(ranking.size());
        for (std::size_t t = 0; t < ranking.size(); ++t) {
            ranked_labels[t] = ranking[t].label;
        }
        const auto ap = average_precision(ranked_labels, query.label);
        if (!ap.has_value()) {
            ++report.skipped_count;
            continue;
        }
        report.per_query_ap.push_back(*ap);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            p_at_k_sum[i] += precision_at_k(ranked_labels, query.label, ks[i]);
        }
    }

    if (report.per_query_ap.empty()) {
        throw DataError("evaluate: every query was skipped (no relevant gallery items)");
    }
    const double scored = static_cast<double>(report.per_query_ap.size());
    double ap_sum = 0.0;
    for (double ap : report.per_query_ap) {
        ap_sum += ap;
    }
    report.mean_ap = ap_sum / scored;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        report.precision_at_k.emplace_back(ks[i], p_at_k_sum[i] / scored);
    }
    return report;
}

std::string report_key_values(const EvalReport& report) {
    char buf[64];
    std::string out;
    std::snprintf(buf, sizeof(buf), "map=%.6f\n", report.mean_ap);
    out += buf;
    for (const auto& [k, p] : report.precision_at_k) {
        std::snprintf(buf, sizeof(buf), "p_at_%u=%.6f\n", k, p);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "n_queries=%zu\n", report.query_count);
    out += buf;
    std::snprintf(buf, sizeof(buf), "n_skipped=%zu\n", report.skipped_count);
    out += buf;
    return out;
}

std::string report_table(const EvalReport& report) {
    char buf[96];
    std::string out = "metric            value\n";
    std::snprintf(buf, sizeof(buf), "mAP               %.6f\n", report.mean_ap);
    out += buf;
    for (const auto& [k, p] : report.precision_at_k) {
        std::snprintf(buf, sizeof(buf), "precision@%-6u  %.6f\n", k, p);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "queries           %zu\n", report.query_count);
    out += buf;
    std::snprintf(buf, sizeof(buf), "skipped           %zu\n", report.skipped_count);
    out += buf;
    return out;
}

}  // namespace pdh
