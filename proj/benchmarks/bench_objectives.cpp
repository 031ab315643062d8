#include <benchmark/benchmark.h>

#include "facetemb/objectives.hpp"
#include "facetemb/training.hpp"

using namespace facetemb;

namespace {

TrainingCorpus bench_corpus(int n_concepts, int n_facets, int props_per_facet) {
    CorpusBuilder builder;
    for (int f = 0; f < n_facets; ++f)
        for (int i = 0; i < props_per_facet; ++i)
            builder.add_pf("p" + std::to_string(f) + "_" + std::to_string(i), "f" + std::to_string(f));
    for (int c = 0; c < n_concepts; ++c)
        for (int f = 0; f < n_facets; ++f)
            builder.add_cp("c" + std::to_string(c),
                           "p" + std::to_string(f) + "_" + std::to_string(c % props_per_facet));
    return builder.build();
}

struct GradSetup {
    TrainingCorpus corpus;
    EncoderParams params;
    CpBatch cp;
    PfBatch pf;
    LossConfig cfg;

    GradSetup(int dim, int batch) : corpus(bench_corpus(64, 5, 11)) {
        Rng rng(1);
        params = init_params(corpus, dim, dim, rng);
        Rng brng(2);
        const auto& pairs = corpus.cp_pairs.pairs();
        for (int i = 0; i < batch; ++i) cp.positives.push_back(pairs[static_cast<std::size_t>(i) % pairs.size()]);
        cp.negatives = sample_negatives(corpus, cp.positives, cfg.n_neg_cp, brng);
        pf = sample_pf_batch(corpus, batch, cfg.n_neg_pf, brng);
    }
};

}  // namespace

static void BM_grad_total(benchmark::State& state) {
    GradSetup setup(static_cast<int>(state.range(0)), 64);
    for (auto _ : state) {
        auto [loss, grads] = grad_total(setup.params, setup.cp, setup.pf, setup.cfg);
        benchmark::DoNotOptimize(loss);
        benchmark::DoNotOptimize(grads.concept_table.data().data());
    }
}
BENCHMARK(BM_grad_total)->Arg(32)->Arg(64)->Arg(128);

static void BM_loss_total(benchmark::State& state) {
    GradSetup setup(static_cast<int>(state.range(0)), 64);
    for (auto _ : state) {
        double loss = loss_total(setup.params, setup.cp, setup.pf, setup.cfg);
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_loss_total)->Arg(32)->Arg(64)->Arg(128);

static void BM_adam_step(benchmark::State& state) {
    GradSetup setup(64, 64);
    auto [loss, grads] = grad_total(setup.params, setup.cp, setup.pf, setup.cfg);
    benchmark::DoNotOptimize(loss);
    AdamState adam;
    TrainConfig cfg;
    for (auto _ : state) {
        adam_step(setup.params, grads, adam, cfg);
        benchmark::DoNotOptimize(setup.params.concept_table.data().data());
    }
}
BENCHMARK(BM_adam_step);

BENCHMARK_MAIN();
