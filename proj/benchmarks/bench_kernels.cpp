#include "party/kernels.hpp"
#include "party/weights_io.hpp"

#include <benchmark/benchmark.h>

using namespace party;

namespace {

void BM_ScaledDotAttention(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Eigen::MatrixXd q = seeded_matrix(n, 64, 1);
    const Eigen::MatrixXd k = seeded_matrix(n, 64, 2);
    const Eigen::MatrixXd v = seeded_matrix(n, 64, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(scaled_dot_attention(q, k, v).sum());
    }
}
BENCHMARK(BM_ScaledDotAttention)->Arg(16)->Arg(64)->Arg(256);

void BM_Hpf(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int d = 128;
    HpfParams params;
    params.self_attn = seeded_attention_params(6, 64, d, d, 10);
    params.cross_arms = seeded_attention_params(6, 64, 384, 384, 11);
    params.cross_legs = seeded_attention_params(6, 64, 384, 384, 12);
    params.split_tokens = seeded_matrix(2, d, 13);
    const Eigen::MatrixXd hol = seeded_matrix(n, d, 14);
    const Eigen::MatrixXd arms = seeded_matrix(n, d, 15);
    const Eigen::MatrixXd legs = seeded_matrix(n, d, 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hpf(hol, arms, legs, params).sum());
    }
}
BENCHMARK(BM_Hpf)->Arg(8)->Arg(32)->Arg(64);

void BM_VqQuantize(benchmark::State& state) {
    const Codebook cb = seeded_codebook(256, 128, 20);
    const Eigen::VectorXd f = seeded_matrix(128, 1, 21).col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vq_quantize(f, cb).first);
    }
}
BENCHMARK(BM_VqQuantize);

void BM_LteForward(benchmark::State& state) {
    const int groups = static_cast<int>(state.range(0));
    const int w = 8, d = 128;
    const Eigen::MatrixXd feats = seeded_matrix(groups * w, d, 30);
    std::vector<DenseStack> mlps;
    for (int g = 0; g < groups; ++g) {
        mlps.push_back(seeded_dense_stack({d, d, d, 1}, Activation::relu,
                                          40 + static_cast<std::uint64_t>(g)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(lte_forward(feats, w, mlps).sum());
    }
}
BENCHMARK(BM_LteForward)->Arg(4)->Arg(16);

} // namespace
