#include "party/metrics.hpp"
#include "party/rng.hpp"

#include <benchmark/benchmark.h>

using namespace party;

namespace {

EmbeddingSet random_set(int n, int d, std::uint64_t seed, bool paired) {
    SplitMix64 rng(seed);
    EmbeddingSet set;
    for (int i = 0; i < n; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "r%06d", i);
        EmbeddingRecord rec;
        rec.id = name;
        auto vec = [&] {
            std::vector<double> v(static_cast<std::size_t>(d));
            for (double& x : v) x = rng.gaussian();
            return v;
        };
        if (paired) {
            rec.text_vec = vec();
            rec.motion_vec = vec();
        } else {
            rec.vector = vec();
        }
        set.records.push_back(std::move(rec));
    }
    set.dim = d;
    return set;
}

void BM_Fid(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const EmbeddingSet a = random_set(1024, d, 1, false);
    const EmbeddingSet b = random_set(1024, d, 2, false);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fid(a, b));
    }
}
BENCHMARK(BM_Fid)->Arg(32)->Arg(128)->Arg(512);

void BM_RPrecision(benchmark::State& state) {
    const EmbeddingSet pairs =
        random_set(static_cast<int>(state.range(0)), 32, 3, true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(r_precision_topk(pairs, 32, 42)[0]);
    }
}
BENCHMARK(BM_RPrecision)->Arg(256)->Arg(1024);

void BM_Diversity(benchmark::State& state) {
    const EmbeddingSet feats = random_set(2048, 64, 4, false);
    for (auto _ : state) {
        benchmark::DoNotOptimize(diversity(feats, 300, 42));
    }
}
BENCHMARK(BM_Diversity);

} // namespace
