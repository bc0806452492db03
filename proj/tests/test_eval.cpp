// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "pdh/error.hpp"
#include "pdh/eval.hpp"
#include "pdh/rng.hpp"

using namespace pdh;

namespace {

HashCode random_code(Rng& rng, uint32_t bits) {
    HashCode code(bits);
    for (uint32_t j = 0; j < bits; ++j) {
        code.set_bit(j, rng.next_coin());
    }
    return code;
}

}  // namespace

TEST_CASE("average_precision hand values") {
    // relevance [1,0,1], R = 2 -> (1/1 + 2/3) / 2
    const auto ap = average_precision({7, 3, 7}, 7);
    REQUIRE(ap.has_value());
    CHECK(*ap == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    // everything relevant
    CHECK(*average_precision({1, 1, 1, 1}, 1) == 1.0);

    // single relevant item at the last of N ranks -> 1/N
    CHECK(*average_precision({0, 0, 0, 9}, 9) == doctest::Approx(0.25));

    // no relevant item: skipped, not zero
    CHECK(!average_precision({1, 2, 3}, 9).has_value());

    CHECK_THROWS_AS(average_precision({}, 0), std::invalid_argument);
}

TEST_CASE("precision_at_k hand values") {
    CHECK(precision_at_k({1, 0, 1, 0}, 1, 2) == 0.5);
    CHECK(precision_at_k({1, 0, 1, 0}, 1, 1) == 1.0);
    // k beyond the gallery keeps k in the denominator
    CHECK(precision_at_k({1, 1}, 1, 4) == 0.5);
    CHECK_THROWS_AS(precision_at_k({1}, 1, 0), std::invalid_argument);
}

TEST_CASE("evaluate on perfectly separated codes") {
    // class c's code: bits 4c..4c+3 set, distance 8 between classes
    CodeBook gallery(16);
    std::vector<QueryItem> queries;
    for (uint16_t c = 0; c < 4; ++c) {
        HashCode code(16);
        for (uint32_t j = 0; j < 4; ++j) {
            code.set_bit(4 * c + j, true);
        }
        for (int copy = 0; copy < 5; ++copy) {
            gallery.add(c * 5 + copy, c, code);
        }
        queries.push_back(QueryItem{c, code});
    }
    const EvalReport report = evaluate(gallery, queries, {1, 5, 10});
    CHECK(report.mean_ap == 1.0);
    CHECK(report.skipped_count == 0);
    CHECK(report.precision_at_k[0].second == 1.0);   // p@1
    CHECK(report.precision_at_k[1].second == 1.0);   // p@5: all 5 same-class first
    CHECK(report.precision_at_k[2].second == 0.5);   // p@10: only 5 relevant exist
}

TEST_CASE("random codes score at chance level") {
    Rng rng(61);
    CodeBook gallery(48);
    const uint32_t classes = 10;
    for (std::size_t i = 0; i < 10000; ++i) {
        gallery.add(i, static_cast<uint16_t>(i % classes), random_code(rng, 48));
    }
    std::vector<QueryItem> queries;
    for (int q = 0; q < 100; ++q) {
        queries.push_back(QueryItem{static_cast<uint16_t>(q % classes), random_code(rng, 48)});
    }
    const EvalReport report = evaluate(gallery, queries, {100});
    CHECK(report.mean_ap >= 0.09);
    CHECK(report.mean_ap <= 0.11);
    CHECK(report.precision_at_k[0].second >= 0.08);
    CHECK(report.precision_at_k[0].second <= 0.12);
}

TEST_CASE("evaluation is invariant to gallery insertion order") {
    Rng rng(62);
    std::vector<CodeEntry> entries;
    for (std::size_t i = 0; i < 300; ++i) {
        entries.push_back(
            CodeEntry{i, static_cast<uint16_t>(rng.next_below(5)), random_code(rng, 24)});
    }
    std::vector<QueryItem> queries;
    for (int q = 0; q < 20; ++q) {
        queries.push_back(QueryItem{static_cast<uint16_t>(q % 5), random_code(rng, 24)});
    }

    CodeBook forward_book(24);
    for (const auto& e : entries) {
        forward_book.add(e.id, e.label, e.code);
    }
    CodeBook reversed_book(24);
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
        reversed_book.add(it->id, it->label, it->code);
    }

    const EvalReport a = evaluate(forward_book, queries, {1, 10});
    const EvalReport b = evaluate(reversed_book, queries, {1, 10});
    CHECK(a.mean_ap == b.mean_ap);
    CHECK(a.precision_at_k == b.precision_at_k);
    CHECK(a.per_query_ap == b.per_query_ap);
}

TEST_CASE("queries with no relevant gallery item are skipped") {
    CodeBook gallery(8);
    gallery.add(0, 0, HashCode(8));
    gallery.add(1, 0, HashCode(8));
    std::vector<QueryItem> queries = {QueryItem{0, HashCode(8)}, QueryItem{5, HashCode(8)}};
    const EvalReport report = evaluate(gallery, queries, {1});
    CHECK(report.query_count == 2);
    CHECK(report.skipped_count == 1);
    CHECK(report.per_query_ap.size() == 1);

    // all queries skipped is an error
    std::vector<QueryItem> hopeless = {QueryItem{5, HashCode(8)}};
    CHECK_THROWS_AS(evaluate(gallery, hopeless, {1}), DataError);
}

TEST_CASE("report formatting uses the pinned keys") {
    EvalReport report;
    report.mean_ap = 0.5;
    report.precision_at_k = {{10, 0.25}, {100, 0.125}};
    report.query_count = 7;
    report.skipped_count = 1;
    const std::string kv = report_key_values(report);
    CHECK(kv.find("map=0.500000\n") != std::string::npos);
    CHECK(kv.find("p_at_10=0.250000\n") != std::string::npos);
    CHECK(kv.find("p_at_100=0.125000\n") != std::string::npos);
    CHECK(kv.find("n_queries=7\n") != std::string::npos);
    CHECK(kv.find("n_skipped=1\n") != std::string::npos);
    CHECK(report_table(report).find("mAP") != std::string::npos);
}
