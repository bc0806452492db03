// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#include <benchmark/benchmark.h>

#include <vector>

#include "pdh/codebook.hpp"
#include "pdh/hash_code.hpp"
#include "pdh/loss.hpp"
#include "pdh/matrix.hpp"
#include "pdh/model.hpp"
#include "pdh/rng.hpp"

namespace {

pdh::HashCode random_code(pdh::Rng& rng, uint32_t bits) {
    pdh::HashCode code(bits);
    for (uint32_t j = 0; j < bits; ++j) {
        code.set_bit(j, rng.next_coin());
    }
    return code;
}

void BM_Hamming(benchmark::State& state) {
    const uint32_t bits = static_cast<uint32_t>(state.range(0));
    pdh::Rng rng(1);
    const pdh::HashCode a = random_code(rng, bits);
    const pdh::HashCode b = random_code(rng, bits);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::hamming(a, b));
    }
}
BENCHMARK(BM_Hamming)->Arg(12)->Arg(48)->Arg(64)->Arg(128)->Arg(1024);

void BM_SearchTopK(benchmark::State& state) {
    const std::size_t gallery_size = static_cast<std::size_t>(state.range(0));
    const std::size_t k = static_cast<std::size_t>(state.range(1));
    pdh::Rng rng(2);
    pdh::CodeBook book(48);
    for (std::size_t i = 0; i < gallery_size; ++i) {
        book.add(i, static_cast<uint16_t>(rng.next_below(10)), random_code(rng, 48));
    }
    const pdh::HashCode query = random_code(rng, 48);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::search_topk(book, query, k));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(gallery_size));
}
BENCHMARK(BM_SearchTopK)->Args({10000, 10})->Args({100000, 10})->Args({100000, 100});

void BM_Binarize(benchmark::State& state) {
    const uint32_t bits = static_cast<uint32_t>(state.range(0));
    pdh::Rng rng(3);
    std::vector<double> q(bits);
    for (auto& v : q) {
        v = rng.next_double();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::binarize(q));
    }
}
BENCHMARK(BM_Binarize)->Arg(48)->Arg(1024);

void BM_ExpectedHamming(benchmark::State& state) {
    const uint32_t bits = static_cast<uint32_t>(state.range(0));
    pdh::Rng rng(4);
    std::vector<double> q(bits), qp(bits);
    for (uint32_t j = 0; j < bits; ++j) {
        q[j] = rng.next_double();
        qp[j] = rng.next_double();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::expected_hamming(q, qp));
    }
}
BENCHMARK(BM_ExpectedHamming)->Arg(12)->Arg(48);

void BM_Matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    pdh::Rng rng(5);
    pdh::Matrix a(n, n), b(n, n);
    for (auto& v : a.values()) {
        v = rng.uniform(-1.0, 1.0);
    }
    for (auto& v : b.values()) {
        v = rng.uniform(-1.0, 1.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::matmul(a, b));
    }
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(256);

void BM_ForwardMlpSmall(benchmark::State& state) {
    const pdh::ModelConfig cfg = pdh::ModelConfig::mlp_small(2, 12);
    pdh::Rng rng(6);
    const pdh::Parameters params = pdh::init_params(cfg, rng);
    const std::vector<double> input = {0.3, 0.7};
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::forward(cfg, params, input));
    }
}
BENCHMARK(BM_ForwardMlpSmall);

void BM_ForwardConvSmall(benchmark::State& state) {
    const pdh::ModelConfig cfg = pdh::ModelConfig::conv_small(28, 28, 1, 12);
    pdh::Rng rng(7);
    const pdh::Parameters params = pdh::init_params(cfg, rng);
    std::vector<double> input(cfg.input.size());
    for (auto& v : input) {
        v = rng.next_double();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdh::forward(cfg, params, input));
    }
}
BENCHMARK(BM_ForwardConvSmall);

}  // namespace

BENCHMARK_MAIN();
