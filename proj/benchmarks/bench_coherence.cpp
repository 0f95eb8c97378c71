#include "party/spatial.hpp"
#include "party/temporal.hpp"

#include "synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace party;

namespace {

const PartitionMap& five_parts() {
    static const PartitionMap map = default_partition("humanml3d22");
    return map;
}

const RefStats& synthetic_stats() {
    static const RefStats stats = [] {
        std::vector<NamedSequence> corpus;
        for (int i = 0; i < 20; ++i) {
            corpus.push_back({"seq" + std::to_string(i),
                              party::testing::jittered_pose_motion(
                                  1000 + static_cast<std::uint64_t>(i))});
        }
        return build_reference_stats(corpus, five_parts());
    }();
    return stats;
}

void BM_TemporalCoherence(benchmark::State& state) {
    const MotionSequence seq = party::testing::white_noise_motion(
        1, static_cast<int>(state.range(0)));
    const CoherenceParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            temporal_coherence(seq, five_parts(), params).score);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TemporalCoherence)->Arg(64)->Arg(196)->Arg(512);

void BM_SpatialCoherence(benchmark::State& state) {
    const MotionSequence seq = party::testing::jittered_pose_motion(
        7, static_cast<int>(state.range(0)));
    const CoherenceParams params;
    const RefStats& stats = synthetic_stats();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            spatial_coherence(seq, five_parts(), stats, params).score);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpatialCoherence)->Arg(64)->Arg(196)->Arg(512);

void BM_BuildReferenceStats(benchmark::State& state) {
    std::vector<NamedSequence> corpus;
    for (int i = 0; i < state.range(0); ++i) {
        corpus.push_back({"seq" + std::to_string(i),
                          party::testing::jittered_pose_motion(
                              3000 + static_cast<std::uint64_t>(i))});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            build_reference_stats(corpus, five_parts()).sample_count);
    }
}
BENCHMARK(BM_BuildReferenceStats)->Arg(8)->Arg(32);

} // namespace

BENCHMARK_MAIN();
