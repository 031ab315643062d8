#include <benchmark/benchmark.h>

#include "facetemb/affinity.hpp"
#include "facetemb/facets.hpp"
#include "facetemb/outlier.hpp"
#include "facetemb/rng.hpp"

using namespace facetemb;

namespace {

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (double& v : m.data()) v = rng.uniform(-1, 1);
    return m;
}

}  // namespace

static void BM_kmeans(benchmark::State& state) {
    Matrix points = random_points(static_cast<std::size_t>(state.range(0)), 64, 3);
    for (auto _ : state) {
        KmeansResult r = kmeans(points, 10, 7);
        benchmark::DoNotOptimize(r.assignments.data());
    }
}
BENCHMARK(BM_kmeans)->Arg(128)->Arg(512)->Arg(2048);

static void BM_affinity_propagation(benchmark::State& state) {
    Matrix s = cosine_similarity_matrix(random_points(static_cast<std::size_t>(state.range(0)), 32, 5));
    ApConfig cfg;
    for (auto _ : state) {
        Clustering c = affinity_propagation(s, cfg);
        benchmark::DoNotOptimize(c.assignment.data());
    }
}
BENCHMARK(BM_affinity_propagation)->Arg(32)->Arg(64)->Arg(128);

static void BM_detect_outliers_single(benchmark::State& state) {
    Rng rng(11);
    std::vector<Vec> vecs;
    for (int i = 0; i < 10; ++i) {
        Vec v(static_cast<std::size_t>(state.range(0)));
        for (double& x : v) x = rng.uniform(-1, 1);
        vecs.push_back(std::move(v));
    }
    for (auto _ : state) {
        std::array<int, 3> pred = detect_outliers_single(vecs);
        benchmark::DoNotOptimize(pred.data());
    }
}
BENCHMARK(BM_detect_outliers_single)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
