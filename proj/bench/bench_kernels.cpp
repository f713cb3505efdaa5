// Serial vs OpenMP kernel comparison. Run with --benchmark_filter=... to
// narrow; MODESEL_THREADS caps the parallel variants.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "modesel/kernels.hpp"

namespace {

using modesel::IndexVec;
namespace kernels = modesel::kernels;

struct ScoresFixture {
    std::size_t n, d, classes;
    std::vector<double> features, weights, bias, entropy, margin;
    IndexVec ids;

    ScoresFixture(std::size_t n_, std::size_t d_, std::size_t c_) : n(n_), d(d_), classes(c_) {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g(0.0, 1.0);
        features.resize(n * d);
        for (auto& v : features) v = g(rng);
        weights.resize(classes * d);
        for (auto& v : weights) v = 0.1 * g(rng);
        bias.assign(classes, 0.0);
        entropy.resize(n);
        margin.resize(n);
        ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    }
};

void bm_model_scores_serial(benchmark::State& state) {
    ScoresFixture f(static_cast<std::size_t>(state.range(0)), 64, 10);
    for (auto _ : state) {
        kernels::model_scores_serial(f.weights.data(), f.bias.data(), f.classes, f.d, 1.0,
                                     f.features.data(), f.ids, f.entropy.data(),
                                     f.margin.data());
        benchmark::ClobberMemory();
    }
}

void bm_model_scores_parallel(benchmark::State& state) {
    ScoresFixture f(static_cast<std::size_t>(state.range(0)), 64, 10);
    for (auto _ : state) {
        kernels::model_scores_parallel(f.weights.data(), f.bias.data(), f.classes, f.d, 1.0,
                                       f.features.data(), f.ids, f.entropy.data(),
                                       f.margin.data());
        benchmark::ClobberMemory();
    }
}

struct DistFixture {
    std::size_t n, k;
    std::vector<double> embeds, min_dist;
    IndexVec pool, batch;

    DistFixture(std::size_t n_, std::size_t k_, std::size_t batch_size) : n(n_), k(k_) {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 1.0);
        embeds.resize(n * k);
        for (auto& v : embeds) v = g(rng);
        min_dist.assign(n, 1e300);
        for (std::size_t i = batch_size; i < n; ++i) pool.push_back(i);
        for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(i);
    }
};

void bm_min_dist_serial(benchmark::State& state) {
    DistFixture f(static_cast<std::size_t>(state.range(0)), 32, 32);
    for (auto _ : state) {
        kernels::min_dist_update_serial(f.embeds.data(), f.k, f.pool, f.batch,
                                        f.min_dist.data());
        benchmark::ClobberMemory();
    }
}

void bm_min_dist_parallel(benchmark::State& state) {
    DistFixture f(static_cast<std::size_t>(state.range(0)), 32, 32);
    for (auto _ : state) {
        kernels::min_dist_update_parallel(f.embeds.data(), f.k, f.pool, f.batch,
                                          f.min_dist.data());
        benchmark::ClobberMemory();
    }
}

BENCHMARK(bm_model_scores_serial)->Arg(2000)->Arg(20000);
BENCHMARK(bm_model_scores_parallel)->Arg(2000)->Arg(20000);
BENCHMARK(bm_min_dist_serial)->Arg(2000)->Arg(20000);
BENCHMARK(bm_min_dist_parallel)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
