#include "party/kernels.hpp"

#include "party/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace party {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "gelu") return Activation::gelu;
    if (name == "none") return Activation::none;
    throw ValidationError("unknown activation '" + name + "'");
}

std::string activation_name(Activation act) {
    switch (act) {
        case Activation::relu: return "relu";
        case Activation::gelu: return "gelu";
        case Activation::none: return "none";
    }
    return "none";
}

double gelu(double x) {
    return x * 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
}

namespace {

double activate(double x, Activation act) {
    switch (act) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::gelu: return gelu(x);
        case Activation::none: return x;
    }
    return x;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + " contains non-finite values");
    }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double peak = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - peak).exp();
    return w / w.sum();
}

} // namespace

int DenseStack::input_dim() const {
    if (layers.empty()) {
        throw ValidationError("dense stack has no layers");
    }
    return static_cast<int>(layers.front().weight.cols());
}

int DenseStack::output_dim() const {
    if (layers.empty()) {
        throw ValidationError("dense stack has no layers");
    }
    return static_cast<int>(layers.back().weight.rows());
}

void DenseStack::validate() const {
    if (layers.empty()) {
        throw ValidationError("dense stack has no layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& l = layers[i];
        if (l.bias.size() != l.weight.rows()) {
            throw ValidationError("dense stack layer " + std::to_string(i) +
                                  ": bias size does not match weight rows");
        }
        check_finite(l.weight, "dense layer weight");
        check_finite(l.bias, "dense layer bias");
        if (i > 0 && layers[i - 1].weight.rows() != l.weight.cols()) {
            throw ValidationError("dense stack layer " + std::to_string(i) +
                                  ": input dim does not chain");
        }
    }
}

Eigen::VectorXd DenseStack::apply(const Eigen::VectorXd& x) const {
    if (layers.empty()) {
        throw ValidationError("dense stack has no layers");
    }
    if (x.size() != layers.front().weight.cols()) {
        throw ValidationError("dense stack: input has dimension " +
                              std::to_string(x.size()) + ", expected " +
                              std::to_string(layers.front().weight.cols()));
    }
    Eigen::VectorXd h = x;
    for (const DenseLayer& l : layers) {
        h = (l.weight * h + l.bias).eval();
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            h[i] = activate(h[i], l.act);
        }
    }
    return h;
}

void Codebook::validate() const {
    if (entries.rows() < 1) {
        throw ValidationError("codebook must have at least one entry");
    }
    check_finite(entries, "codebook");
}

void AttentionParams::validate() const {
    if (heads < 1 || head_dim < 1) {
        throw ValidationError("attention params: heads and head_dim must be >= 1");
    }
    const Eigen::Index proj = static_cast<Eigen::Index>(heads) * head_dim;
    if (wq.rows() != proj || wk.rows() != proj || wv.rows() != proj) {
        throw ValidationError(
            "attention params: projection rows must equal heads*head_dim");
    }
    if (wk.cols() != wv.cols()) {
        throw ValidationError(
            "attention params: wk and wv must share their input dimension");
    }
    check_finite(wq, "wq");
    check_finite(wk, "wk");
    check_finite(wv, "wv");
}

void CycleConfig::validate() const {
    if (t_cycle < 1) {
        throw ValidationError("cycle config: t_cycle must be >= 1");
    }
    if (max_len < 1) {
        throw ValidationError("cycle config: max_len must be >= 1");
    }
    if (end_token < 0) {
        throw ValidationError("cycle config: end_token must be >= 0");
    }
}

Eigen::MatrixXd lte_forward(const Eigen::MatrixXd& frame_feats, int window,
                            std::span<const DenseStack> group_mlps) {
    if (window < 1) {
        throw ValidationError("lte_forward: window must be >= 1");
    }
    const Eigen::Index t = frame_feats.rows();
    const Eigen::Index d = frame_feats.cols();
    if (t < 1) {
        throw ValidationError("lte_forward: no frames");
    }
    const Eigen::Index groups = (t + window - 1) / window;
    if (static_cast<Eigen::Index>(group_mlps.size()) != groups) {
        throw ValidationError("lte_forward: expected " + std::to_string(groups) +
                              " group stacks, got " +
                              std::to_string(group_mlps.size()));
    }
    Eigen::MatrixXd out(groups, d);
    for (Eigen::Index g = 0; g < groups; ++g) {
        const DenseStack& mlp = group_mlps[static_cast<std::size_t>(g)];
        if (mlp.output_dim() != 1) {
            throw ValidationError("lte_forward: group stacks must emit one score");
        }
        Eigen::VectorXd logits(window);
        Eigen::MatrixXd feats(window, d);
        for (int j = 0; j < window; ++j) {
            // repeat the final frame when t is not divisible by the window
            const Eigen::Index idx = std::min(g * window + j, t - 1);
            feats.row(j) = frame_feats.row(idx);
            logits[j] = mlp.apply(feats.row(j).transpose())[0];
        }
        const Eigen::VectorXd alpha = softmax(logits);
        out.row(g) = (alpha.transpose() * feats).row(0);
    }
    return out;
}

Eigen::MatrixXd gte_forward(const Eigen::MatrixXd& nodes,
                            const Eigen::MatrixXd& adj_norm,
                            const Eigen::MatrixXd& weight) {
    if (adj_norm.rows() != adj_norm.cols() || adj_norm.rows() != nodes.rows()) {
        throw ValidationError(
            "gte_forward: adjacency must be square with one row per node");
    }
    if (weight.rows() != nodes.cols()) {
        throw ValidationError("gte_forward: weight rows must match node dim");
    }
    Eigen::MatrixXd out = adj_norm * (nodes * weight);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            out(i, j) = gelu(out(i, j));
        }
    }
    return out;
}

Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency) {
    if (adjacency.rows() != adjacency.cols()) {
        throw ValidationError("normalize_adjacency: matrix must be square");
    }
    if ((adjacency.array() < 0.0).any()) {
        throw ValidationError("normalize_adjacency: entries must be nonnegative");
    }
    const Eigen::Index n = adjacency.rows();
    const Eigen::MatrixXd with_loops =
        adjacency + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double deg = with_loops.row(i).sum();
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg); // deg >= 1 from the self loop
    }
    return inv_sqrt_deg.asDiagonal() * with_loops * inv_sqrt_deg.asDiagonal();
}

Eigen::MatrixXd chain_adjacency(int n) {
    if (n < 1) {
        throw ValidationError("chain_adjacency: n must be >= 1");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = 1.0;
        a(i + 1, i) = 1.0;
    }
    return a;
}

std::pair<int, Eigen::VectorXd> vq_quantize(const Eigen::VectorXd& feat,
                                            const Codebook& codebook) {
    codebook.validate();
    if (feat.size() != codebook.entries.cols()) {
        throw ValidationError("vq_quantize: feature dimension " +
                              std::to_string(feat.size()) +
                              " does not match codebook dimension " +
                              std::to_string(codebook.entries.cols()));
    }
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < codebook.entries.rows(); ++i) {
        const double dist =
            (codebook.entries.row(i).transpose() - feat).squaredNorm();
        if (dist < best_dist) { // strict: ties keep the lowest index
            best_dist = dist;
            best = static_cast<int>(i);
        }
    }
    return {best, codebook.entries.row(best).transpose()};
}

VqLosses vq_losses(const Eigen::MatrixXd& decoded,
                   const Eigen::MatrixXd& target,
                   const Eigen::MatrixXd& quantized,
                   const Eigen::MatrixXd& encoded, double lambda_app) {
    if (decoded.rows() != target.rows() || decoded.cols() != target.cols()) {
        throw ValidationError("vq_losses: decoded/target shape mismatch");
    }
    if (quantized.rows() != encoded.rows() || quantized.cols() != encoded.cols()) {
        throw ValidationError("vq_losses: quantized/encoded shape mismatch");
    }
    VqLosses out;
    out.rec = (decoded - target).cwiseAbs().mean();
    out.app = (quantized - encoded).array().square().mean();
    out.vq = out.rec + lambda_app * out.app;
    return out;
}

std::vector<Eigen::VectorXd> ptg_transform(const Eigen::VectorXd& c,
                                           std::span<const DenseStack> mlps) {
    if (mlps.empty()) {
        throw ValidationError("ptg_transform: need at least one stack");
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(mlps.size());
    for (const DenseStack& mlp : mlps) {
        out.push_back(mlp.apply(c));
    }
    return out;
}

namespace {

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return a.dot(b) / (na * nb);
}

} // namespace

double contrastive_term(double positive_sim,
                        std::span<const double> negative_sims, double tau) {
    if (!(tau > 0.0)) {
        throw ValidationError("contrastive_term: tau must be > 0");
    }
    const double pos = positive_sim / tau;
    double peak = pos;
    for (double s : negative_sims) {
        peak = std::max(peak, s / tau);
    }
    double z = std::exp(pos - peak);
    for (double s : negative_sims) {
        z += std::exp(s / tau - peak);
    }
    // -log softmax(pos) = logsumexp - pos
    return (peak + std::log(z)) - pos;
}

double diversity_loss(const Eigen::VectorXd& c,
                      std::span<const Eigen::VectorXd> variants, double tau) {
    if (variants.size() < 2) {
        throw ValidationError("diversity_loss: need at least 2 variants");
    }
    const std::size_t k = variants.size();
    double acc = 0.0;
    std::vector<double> negatives;
    negatives.reserve(k - 1);
    for (std::size_t n = 0; n < k; ++n) {
        negatives.clear();
        for (std::size_t m = 0; m < k; ++m) {
            if (m == n) continue;
            negatives.push_back(cosine_similarity(variants[n], variants[m]));
        }
        acc += contrastive_term(cosine_similarity(variants[n], c), negatives,
                                tau);
    }
    return acc / static_cast<double>(k);
}

GateResult part_gate(const Eigen::MatrixXd& embeddings,
                     const Eigen::MatrixXd& gate_weight,
                     const Eigen::VectorXd& gate_bias) {
    const Eigen::Index k = embeddings.rows();
    const Eigen::Index d = embeddings.cols();
    if (k < 1) {
        throw ValidationError("part_gate: need at least one embedding");
    }
    if (gate_weight.rows() != k || gate_weight.cols() != k * d ||
        gate_bias.size() != k) {
        throw ValidationError("part_gate: gate expects a K x (K*d) weight "
                              "and a K bias");
    }
    // row-major flatten of the K x d stack
    Eigen::VectorXd flat(k * d);
    for (Eigen::Index i = 0; i < k; ++i) {
        flat.segment(i * d, d) = embeddings.row(i).transpose();
    }
    GateResult out;
    out.weights = softmax(gate_weight * flat + gate_bias);
    out.fused = embeddings.transpose() * out.weights;
    return out;
}

double aux_loss(const Eigen::VectorXd& gated,
                const Eigen::VectorXd& part_text_embedding) {
    if (gated.size() != part_text_embedding.size()) {
        throw ValidationError("aux_loss: dimension mismatch");
    }
    return (gated - part_text_embedding).cwiseAbs().mean();
}

Eigen::MatrixXd scaled_dot_attention(const Eigen::MatrixXd& q,
                                     const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v) {
    if (q.cols() != k.cols()) {
        throw ValidationError("scaled_dot_attention: q/k dimension mismatch");
    }
    if (k.rows() != v.rows()) {
        throw ValidationError("scaled_dot_attention: k/v row mismatch");
    }
    if (k.rows() < 1) {
        throw ValidationError("scaled_dot_attention: no keys");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Eigen::MatrixXd out(q.rows(), v.cols());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        const Eigen::VectorXd scores = (k * q.row(i).transpose()) * scale;
        const Eigen::VectorXd alpha = softmax(scores);
        out.row(i) = (alpha.transpose() * v).row(0);
    }
    return out;
}

Eigen::MatrixXd multi_head_attention(const Eigen::MatrixXd& x_query,
                                     const Eigen::MatrixXd& x_kv,
                                     const AttentionParams& params) {
    params.validate();
    if (x_query.cols() != params.wq.cols()) {
        throw ValidationError("multi_head_attention: query input dim mismatch");
    }
    if (x_kv.cols() != params.wk.cols()) {
        throw ValidationError("multi_head_attention: key/value input dim mismatch");
    }
    const Eigen::MatrixXd q = x_query * params.wq.transpose();
    const Eigen::MatrixXd k = x_kv * params.wk.transpose();
    const Eigen::MatrixXd v = x_kv * params.wv.transpose();
    Eigen::MatrixXd out(x_query.rows(),
                        static_cast<Eigen::Index>(params.heads) * params.head_dim);
    for (int h = 0; h < params.heads; ++h) {
        const Eigen::Index offset = static_cast<Eigen::Index>(h) * params.head_dim;
        out.middleCols(offset, params.head_dim) = scaled_dot_attention(
            q.middleCols(offset, params.head_dim),
            k.middleCols(offset, params.head_dim),
            v.middleCols(offset, params.head_dim));
    }
    return out;
}

Eigen::MatrixXd hpf(const Eigen::MatrixXd& z_hol,
                    const Eigen::MatrixXd& z_arms,
                    const Eigen::MatrixXd& z_legs, const HpfParams& params) {
    const Eigen::Index n = z_hol.rows();
    if (z_arms.rows() != n || z_legs.rows() != n) {
        throw ValidationError("hpf: streams must share their length");
    }
    if (n == 0) {
        const Eigen::Index out_dim =
            static_cast<Eigen::Index>(params.cross_arms.heads) *
            params.cross_arms.head_dim;
        return Eigen::MatrixXd(0, out_dim);
    }
    const Eigen::Index d = z_hol.cols();
    if (z_arms.cols() != d || z_legs.cols() != d ||
        params.split_tokens.rows() != 2 || params.split_tokens.cols() != d) {
        throw ValidationError("hpf: streams and split tokens must share "
                              "their embedding dimension");
    }
    Eigen::MatrixXd concat(3 * n + 2, d);
    concat.topRows(n) = z_hol;
    concat.row(n) = params.split_tokens.row(0);
    concat.middleRows(n + 1, n) = z_arms;
    concat.row(2 * n + 1) = params.split_tokens.row(1);
    concat.bottomRows(n) = z_legs;

    const Eigen::MatrixXd attended =
        multi_head_attention(concat, concat, params.self_attn);
    const Eigen::MatrixXd refined_hol = attended.topRows(n);
    const Eigen::MatrixXd refined_arms = attended.middleRows(n + 1, n);
    const Eigen::MatrixXd refined_legs = attended.bottomRows(n);

    const Eigen::MatrixXd cross_arms =
        multi_head_attention(refined_hol, refined_arms, params.cross_arms);
    const Eigen::MatrixXd cross_legs =
        multi_head_attention(refined_hol, refined_legs, params.cross_legs);
    return cross_arms + cross_legs;
}

Eigen::VectorXd fuse_guidance(const Eigen::MatrixXd& arm_tokens,
                              const Eigen::MatrixXd& leg_tokens,
                              const DenseStack& fusion_mlp) {
    if (arm_tokens.rows() != leg_tokens.rows() ||
        arm_tokens.cols() != leg_tokens.cols()) {
        throw ValidationError("fuse_guidance: token shape mismatch");
    }
    if (arm_tokens.rows() < 1) {
        throw ValidationError("fuse_guidance: no tokens");
    }
    Eigen::VectorXd acc =
        Eigen::VectorXd::Zero(fusion_mlp.output_dim());
    for (Eigen::Index t = 0; t < arm_tokens.rows(); ++t) {
        acc += fusion_mlp.apply(
            (arm_tokens.row(t) + leg_tokens.row(t)).transpose());
    }
    return acc;
}

namespace {

std::pair<int, Eigen::VectorXd> run_hook(const GeneratorHook& hook,
                                         const StepInput& input,
                                         const char* stream) {
    auto [token, embedding] = hook.next(input);
    if (token < 0 || token >= hook.vocab_size) {
        throw ContractError(std::string(stream) + " hook returned token " +
                            std::to_string(token) + " outside vocabulary of " +
                            std::to_string(hook.vocab_size));
    }
    if (embedding.size() != hook.embed_dim) {
        throw ContractError(std::string(stream) +
                            " hook returned embedding of dimension " +
                            std::to_string(embedding.size()) + ", expected " +
                            std::to_string(hook.embed_dim));
    }
    return {token, std::move(embedding)};
}

} // namespace

CycleResult generate_cycle(const GeneratorHook& arms_gen,
                           const GeneratorHook& legs_gen,
                           const GeneratorHook& holistic_gen,
                           const CycleConfig& config,
                           const DenseStack& fusion_mlp,
                           const HpfParams& hpf_params,
                           const Eigen::VectorXd& cond_arms,
                           const Eigen::VectorXd& cond_legs,
                           const Eigen::VectorXd& cond_holistic) {
    config.validate();
    if (arms_gen.embed_dim != legs_gen.embed_dim ||
        arms_gen.embed_dim != holistic_gen.embed_dim) {
        throw ValidationError("generate_cycle: hooks disagree on embed_dim");
    }
    const Eigen::Index d = arms_gen.embed_dim;

    CycleResult result;
    Eigen::MatrixXd arm_embeds(0, d);
    Eigen::MatrixXd leg_embeds(0, d);
    Eigen::MatrixXd hol_embeds(0, d);

    auto append_row = [](Eigen::MatrixXd& m, const Eigen::VectorXd& row) {
        m.conservativeResize(m.rows() + 1, Eigen::NoChange);
        m.row(m.rows() - 1) = row.transpose();
    };

    int holistic_step = 0; // 1-based count of emitted holistic tokens
    bool done = false;
    for (int cycle = 1; !done; ++cycle) {
        // part phase: both parts advance t_cycle steps
        const Eigen::Index cycle_start = arm_embeds.rows();
        for (int s = 0; s < config.t_cycle; ++s) {
            {
                const StepInput input{result.arm_tokens, arm_embeds, cond_arms,
                                      nullptr};
                auto [token, embedding] = run_hook(arms_gen, input, "arms");
                result.arm_tokens.push_back(token);
                append_row(arm_embeds, embedding);
            }
            {
                const StepInput input{result.leg_tokens, leg_embeds, cond_legs,
                                      nullptr};
                auto [token, embedding] = run_hook(legs_gen, input, "legs");
                result.leg_tokens.push_back(token);
                append_row(leg_embeds, embedding);
            }
        }
        const Eigen::VectorXd g = fuse_guidance(
            arm_embeds.bottomRows(config.t_cycle),
            leg_embeds.bottomRows(config.t_cycle), fusion_mlp);
        result.guidance.push_back(g);

        // holistic phase: up to t_cycle steps under this cycle's guidance
        for (int s = 0; s < config.t_cycle; ++s) {
            const Eigen::Index hist = hol_embeds.rows();
            // paper-indexed z_{1:t-1}: parts have always generated at least
            // this many tokens, so the shared prefix is well defined
            const Eigen::MatrixXd refined =
                hpf(hol_embeds, arm_embeds.topRows(hist),
                    leg_embeds.topRows(hist), hpf_params);
            const StepInput input{result.holistic_tokens, refined,
                                  cond_holistic, &g};
            auto [token, embedding] = run_hook(holistic_gen, input, "holistic");
            result.holistic_tokens.push_back(token);
            append_row(hol_embeds, embedding);
            ++holistic_step;
            result.guidance_log.push_back(
                {holistic_step, cycle, static_cast<int>(cycle_start) + config.t_cycle});
            if (token == config.end_token ||
                holistic_step >= config.max_len) {
                done = true;
                break;
            }
        }
    }
    return result;
}

double nll_loss(std::span<const double> dist, int token) {
    if (token < 0 || token >= static_cast<int>(dist.size())) {
        throw ValidationError("nll_loss: token index out of range");
    }
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0) {
            throw ValidationError("nll_loss: negative probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ValidationError("nll_loss: distribution does not sum to 1");
    }
    const double p = std::max(dist[static_cast<std::size_t>(token)], 1e-12);
    return -std::log(p);
}

double total_loss(double l_hol, double l_part, double l_div, double l_aux,
                  double lambda_div, double lambda_aux) {
    return l_hol + l_part + lambda_div * l_div + lambda_aux * l_aux;
}

} // namespace party
