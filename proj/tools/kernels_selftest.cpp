#include "kernels_selftest.hpp"

#include "party/kernels.hpp"
#include "party/rng.hpp"
#include "party/weights_io.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace party::tools {

namespace {

struct Suite {
    SplitMix64 rng;
    int failures = 0;

    explicit Suite(std::uint64_t seed) : rng(seed) {}

    void property(const std::string& name, const std::function<bool()>& check) {
        bool ok = false;
        std::string detail;
        try {
            ok = check();
        } catch (const std::exception& e) {
            detail = e.what();
        }
        if (ok) {
            std::printf("[pass] %s\n", name.c_str());
        } else {
            ++failures;
            std::printf("[FAIL] %s%s%s\n", name.c_str(),
                        detail.empty() ? "" : ": ", detail.c_str());
        }
    }

    Eigen::MatrixXd matrix(int r, int c) {
        return seeded_matrix(r, c, rng.next_u64());
    }
};

} // namespace

int run_kernels_selftest(std::uint64_t seed) {
    Suite s(seed);

    s.property("lte softmax weights sum to 1 and outputs stay in the hull",
               [&] {
        for (int trial = 0; trial < 50; ++trial) {
            const int w = 2 + static_cast<int>(s.rng.bounded(4));
            const int groups = 1 + static_cast<int>(s.rng.bounded(3));
            const int d = 1 + static_cast<int>(s.rng.bounded(5));
            const Eigen::MatrixXd feats = s.matrix(w * groups, d);
            std::vector<DenseStack> mlps;
            for (int g = 0; g < groups; ++g) {
                mlps.push_back(seeded_dense_stack({d, 4, 1}, Activation::relu,
                                                  s.rng.next_u64()));
            }
            const Eigen::MatrixXd out = lte_forward(feats, w, mlps);
            for (int g = 0; g < groups; ++g) {
                for (int c = 0; c < d; ++c) {
                    const auto block = feats.block(g * w, c, w, 1);
                    if (out(g, c) < block.minCoeff() - 1e-12 ||
                        out(g, c) > block.maxCoeff() + 1e-12) {
                        return false;
                    }
                }
            }
        }
        return true;
    });

    s.property("gate weights are a probability vector", [&] {
        for (int trial = 0; trial < 50; ++trial) {
            const int k = 2 + static_cast<int>(s.rng.bounded(4));
            const int d = 1 + static_cast<int>(s.rng.bounded(5));
            const GateResult g = part_gate(s.matrix(k, d), s.matrix(k, k * d),
                                           s.matrix(k, 1).col(0));
            if (std::abs(g.weights.sum() - 1.0) > 1e-9) return false;
            if (g.weights.minCoeff() < 0.0) return false;
        }
        return true;
    });

    s.property("attention rows sum to 1 (checked through constant values)",
               [&] {
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 1 + static_cast<int>(s.rng.bounded(5));
            const int m = 1 + static_cast<int>(s.rng.bounded(5));
            const int dk = 1 + static_cast<int>(s.rng.bounded(4));
            // all-ones values expose the row sums directly
            const Eigen::MatrixXd out =
                scaled_dot_attention(s.matrix(n, dk), s.matrix(m, dk),
                                     Eigen::MatrixXd::Ones(m, 1));
            for (int r = 0; r < n; ++r) {
                if (std::abs(out(r, 0) - 1.0) > 1e-9) return false;
            }
        }
        return true;
    });

    s.property("vq_quantize matches the exhaustive scan", [&] {
        const Codebook cb = seeded_codebook(32, 6, s.rng.next_u64());
        for (int trial = 0; trial < 200; ++trial) {
            Eigen::VectorXd f(6);
            for (int c = 0; c < 6; ++c) f[c] = s.rng.uniform(-0.2, 0.2);
            const auto [idx, entry] = vq_quantize(f, cb);
            int best = 0;
            double best_d = (cb.entries.row(0).transpose() - f).squaredNorm();
            for (int i = 1; i < 32; ++i) {
                const double d =
                    (cb.entries.row(i).transpose() - f).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            if (idx != best) return false;
        }
        return true;
    });

    s.property("diversity_loss(identical embeddings, K=4) equals ln 4", [&] {
        Eigen::VectorXd c = s.matrix(8, 1).col(0);
        const std::vector<Eigen::VectorXd> variants(4, c);
        return std::abs(diversity_loss(c, variants, 0.05) - std::log(4.0)) <
               1e-12;
    });

    s.property("contrastive term vanishes for anti-aligned negatives", [&] {
        const std::vector<double> negs(3, -1.0);
        return contrastive_term(1.0, negs, 0.05) < 1e-12;
    });

    s.property("generate_cycle is deterministic and schedules guidance", [&] {
        CycleConfig config;
        config.t_cycle = 3;
        config.max_len = 7;
        config.end_token = 0;
        GeneratorHook hook;
        hook.vocab_size = 64;
        hook.embed_dim = 2;
        hook.next = [](const StepInput& in) {
            Eigen::VectorXd e(2);
            e << static_cast<double>(in.history_ids.size()), 1.0;
            return std::make_pair(
                static_cast<int>(in.history_ids.size() % 63) + 1, e);
        };
        HpfParams hp;
        hp.self_attn = seeded_attention_params(1, 2, 2, 2, s.rng.next_u64());
        hp.cross_arms = seeded_attention_params(1, 2, 2, 2, s.rng.next_u64());
        hp.cross_legs = seeded_attention_params(1, 2, 2, 2, s.rng.next_u64());
        hp.split_tokens = s.matrix(2, 2);
        const DenseStack fusion =
            seeded_dense_stack({2, 2}, Activation::none, s.rng.next_u64());
        const Eigen::VectorXd cond = Eigen::VectorXd::Zero(2);
        const CycleResult a = generate_cycle(hook, hook, hook, config, fusion,
                                             hp, cond, cond, cond);
        const CycleResult b = generate_cycle(hook, hook, hook, config, fusion,
                                             hp, cond, cond, cond);
        if (a.holistic_tokens != b.holistic_tokens) return false;
        if (a.holistic_tokens.size() != 7) return false;
        if (a.arm_tokens.size() != 9 || a.leg_tokens.size() != 9) return false;
        for (const auto& use : a.guidance_log) {
            if (use.cycle != (use.holistic_step + 2) / 3) return false;
            if (use.part_tokens_seen < use.holistic_step) return false;
        }
        return true;
    });

    s.property("hpf is symmetric under part relabeling", [&] {
        const int d = 3;
        HpfParams hp;
        hp.self_attn = seeded_attention_params(1, d, d, d, s.rng.next_u64());
        hp.cross_arms = seeded_attention_params(1, d, d, d, s.rng.next_u64());
        hp.cross_legs = seeded_attention_params(1, d, d, d, s.rng.next_u64());
        hp.split_tokens = s.matrix(2, d);
        const Eigen::MatrixXd hol = s.matrix(4, d);
        const Eigen::MatrixXd arms = s.matrix(4, d);
        const Eigen::MatrixXd legs = s.matrix(4, d);
        HpfParams swapped = hp;
        std::swap(swapped.cross_arms, swapped.cross_legs);
        const Eigen::MatrixXd a = hpf(hol, arms, legs, hp);
        const Eigen::MatrixXd b = hpf(hol, legs, arms, swapped);
        return (a - b).cwiseAbs().maxCoeff() < 1e-12;
    });

    s.property("nll_loss respects the probability floor", [&] {
        const std::vector<double> onehot = {1.0, 0.0, 0.0, 0.0};
        if (nll_loss(onehot, 0) != 0.0) return false;
        if (std::abs(nll_loss(onehot, 3) + std::log(1e-12)) > 1e-9) return false;
        const std::vector<double> uniform(4, 0.25);
        return std::abs(nll_loss(uniform, 1) - std::log(4.0)) < 1e-12;
    });

    s.property("normalized adjacency is symmetric with unit self-loop limit",
               [&] {
        for (int n : {1, 2, 5, 9}) {
            const Eigen::MatrixXd a = normalize_adjacency(chain_adjacency(n));
            if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14) return false;
        }
        return normalize_adjacency(Eigen::MatrixXd::Zero(1, 1))(0, 0) == 1.0;
    });

    std::printf("%d of %d properties failed\n", s.failures, 10);
    return s.failures;
}

} // namespace party::tools
