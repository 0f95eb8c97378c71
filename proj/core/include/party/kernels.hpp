#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace party {

/// Shipped architecture defaults for the kernels below.
namespace arch_defaults {
inline constexpr int holistic_codebook_entries = 256;
inline constexpr int part_codebook_entries = 128;
inline constexpr int code_dim = 128;
inline constexpr int holistic_lte_window = 8;
inline constexpr int part_lte_window = 12;
inline constexpr int attention_heads = 6;
inline constexpr int attention_head_dim = 64;
inline constexpr int ptg_transform_count = 4;
inline constexpr int guidance_steps = 3;
inline constexpr double contrastive_temperature = 0.05;
inline constexpr double lambda_diversity = 0.1;
inline constexpr double lambda_aux = 0.1;
inline constexpr double lambda_approximation = 1.0;
} // namespace arch_defaults

enum class Activation { relu, gelu, none };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation act);

/// Exact Gaussian-CDF form: x * Phi(x), not the tanh approximation.
double gelu(double x);

struct DenseLayer {
    Eigen::MatrixXd weight; // out x in
    Eigen::VectorXd bias;   // out
    Activation act = Activation::none;
};

struct DenseStack {
    std::vector<DenseLayer> layers;

    int input_dim() const;
    int output_dim() const;
    void validate() const; // adjacent dimensions chain, entries finite
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

struct Codebook {
    Eigen::MatrixXd entries; // C x d
    void validate() const;
};

struct AttentionParams {
    Eigen::MatrixXd wq; // (heads*head_dim) x d_q_in
    Eigen::MatrixXd wk; // (heads*head_dim) x d_kv_in
    Eigen::MatrixXd wv; // (heads*head_dim) x d_kv_in
    int heads = arch_defaults::attention_heads;
    int head_dim = arch_defaults::attention_head_dim;
    void validate() const;
};

struct HpfParams {
    AttentionParams self_attn;  // over [hol; split; arms; split; legs]
    AttentionParams cross_arms; // query from refined hol, k/v from arms
    AttentionParams cross_legs;
    Eigen::MatrixXd split_tokens; // 2 x d, separators between the segments
};

struct CycleConfig {
    int t_cycle = arch_defaults::guidance_steps; // part steps per guidance
    int max_len = 1;
    int end_token = 0;
    void validate() const;
};

/// Everything a next-token hook sees at one step. For the holistic stream
/// the history embeddings are the HPF-refined ones.
struct StepInput {
    const std::vector<int>& history_ids;
    const Eigen::MatrixXd& history_embeddings; // t-1 rows
    const Eigen::VectorXd& conditioning;
    const Eigen::VectorXd* guidance; // null for part streams
};

struct GeneratorHook {
    int vocab_size = 0;
    int embed_dim = 0;
    std::function<std::pair<int, Eigen::VectorXd>(const StepInput&)> next;
};

/// Windowed softmax pooling: frames are grouped w at a time (the last frame
/// repeats when t is not divisible by w), each group's per-frame scores come
/// from its own scalar-output stack, and the group feature is the
/// softmax-weighted sum of its frames.
Eigen::MatrixXd lte_forward(const Eigen::MatrixXd& frame_feats, int window,
                            std::span<const DenseStack> group_mlps);

/// GELU(adj_norm * (nodes * weight)), elementwise GELU.
Eigen::MatrixXd gte_forward(const Eigen::MatrixXd& nodes,
                            const Eigen::MatrixXd& adj_norm,
                            const Eigen::MatrixXd& weight);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency);

/// Temporal chain: A[i][j] = 1 iff |i-j| == 1.
Eigen::MatrixXd chain_adjacency(int n);

/// Nearest codebook entry by L2 distance; ties go to the lowest index.
std::pair<int, Eigen::VectorXd> vq_quantize(const Eigen::VectorXd& feat,
                                            const Codebook& codebook);

struct VqLosses {
    double rec = 0.0; // mean absolute error, decoded vs target
    double app = 0.0; // mean squared error, quantized vs encoded
    double vq = 0.0;  // rec + lambda_app * app
};

VqLosses vq_losses(const Eigen::MatrixXd& decoded,
                   const Eigen::MatrixXd& target,
                   const Eigen::MatrixXd& quantized,
                   const Eigen::MatrixXd& encoded,
                   double lambda_app = arch_defaults::lambda_approximation);

/// K diversified transforms of one embedding.
std::vector<Eigen::VectorXd> ptg_transform(const Eigen::VectorXd& c,
                                           std::span<const DenseStack> mlps);

/// One anchor's contrastive term from raw similarity values, log-sum-exp
/// stabilized: -log( e^{pos/tau} / (e^{pos/tau} + sum_m e^{neg_m/tau}) ).
double contrastive_term(double positive_sim,
                        std::span<const double> negative_sims, double tau);

/// InfoNCE-style loss over cosine similarities:
/// mean_n -log( e^{s(c'_n,c)/tau} / (e^{s(c'_n,c)/tau}
///              + sum_{m!=n} e^{s(c'_n,c'_m)/tau}) )
double diversity_loss(const Eigen::VectorXd& c,
                      std::span<const Eigen::VectorXd> variants, double tau);

struct GateResult {
    Eigen::VectorXd fused;
    Eigen::VectorXd weights; // softmax over K, sums to 1
};

/// weights = softmax(W * vec(embeddings) + b); fused = weights^T embeddings.
GateResult part_gate(const Eigen::MatrixXd& embeddings, // K x d
                     const Eigen::MatrixXd& gate_weight, // K x (K*d)
                     const Eigen::VectorXd& gate_bias);  // K

/// Mean absolute error between the gated output and the part text embedding.
double aux_loss(const Eigen::VectorXd& gated,
                const Eigen::VectorXd& part_text_embedding);

/// softmax(Q K^T / sqrt(d_k)) V on raw matrices.
Eigen::MatrixXd scaled_dot_attention(const Eigen::MatrixXd& q,
                                     const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v);

/// Multi-head wrapper: project, attend per head, concatenate heads.
Eigen::MatrixXd multi_head_attention(const Eigen::MatrixXd& x_query,
                                     const Eigen::MatrixXd& x_kv,
                                     const AttentionParams& params);

/// Joint self-attention over [hol; split; arms; split; legs], re-split by
/// the known segment lengths, then per-part cross-attention with the
/// refined holistic rows as query; the two cross outputs are summed.
/// Empty inputs pass through as an empty matrix.
Eigen::MatrixXd hpf(const Eigen::MatrixXd& z_hol,
                    const Eigen::MatrixXd& z_arms,
                    const Eigen::MatrixXd& z_legs, const HpfParams& params);

/// sum_t MLP(arm_t + leg_t) over the cycle's rows.
Eigen::VectorXd fuse_guidance(const Eigen::MatrixXd& arm_tokens,
                              const Eigen::MatrixXd& leg_tokens,
                              const DenseStack& fusion_mlp);

struct CycleResult {
    std::vector<int> holistic_tokens;
    std::vector<int> arm_tokens;
    std::vector<int> leg_tokens;
    std::vector<Eigen::VectorXd> guidance; // G_i per cycle, 0-indexed
    // guidance log: holistic step t (1-based) consumed guidance cycle index
    struct GuidanceUse {
        int holistic_step;
        int cycle;            // 1-based
        int part_tokens_seen; // per-part tokens generated before this step
    };
    std::vector<GuidanceUse> guidance_log;
};

/// Alternates t_cycle part steps (both parts), guidance fusion, then up to
/// t_cycle holistic steps conditioned on the fused guidance and the
/// HPF-refined history; stops at end_token or max_len holistic tokens.
CycleResult generate_cycle(const GeneratorHook& arms_gen,
                           const GeneratorHook& legs_gen,
                           const GeneratorHook& holistic_gen,
                           const CycleConfig& config,
                           const DenseStack& fusion_mlp,
                           const HpfParams& hpf_params,
                           const Eigen::VectorXd& cond_arms,
                           const Eigen::VectorXd& cond_legs,
                           const Eigen::VectorXd& cond_holistic);

/// -log(max(dist[token], 1e-12)); dist must be a probability vector.
double nll_loss(std::span<const double> dist, int token);

/// l_hol + l_part + lambda_div * l_div + lambda_aux * l_aux
double total_loss(double l_hol, double l_part, double l_div, double l_aux,
                  double lambda_div = arch_defaults::lambda_diversity,
                  double lambda_aux = arch_defaults::lambda_aux);

} // namespace party
