#include "party/metrics.hpp"

#include "party/errors.hpp"
#include "party/log.hpp"
#include "party/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace party {

GaussianSummary summarize_gaussian(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 2) {
        throw ValidationError("gaussian summary needs at least 2 samples");
    }
    GaussianSummary s;
    s.n = static_cast<std::size_t>(rows.rows());
    s.mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
    s.cov = (centered.transpose() * centered) /
            static_cast<double>(rows.rows() - 1);
    // clean up round-off asymmetry
    s.cov = ((s.cov + s.cov.transpose()) * 0.5).eval();
    return s;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw ValidationError("matrix_sqrt_psd: matrix must be square");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw ValidationError("matrix_sqrt_psd: matrix is not symmetric");
    }
    const Eigen::MatrixXd sym = (m + m.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("matrix_sqrt_psd: eigendecomposition failed");
    }
    Eigen::VectorXd evals = solver.eigenvalues();
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        evals[i] = evals[i] > 0.0 ? std::sqrt(evals[i]) : 0.0;
    }
    const Eigen::MatrixXd& v = solver.eigenvectors();
    Eigen::MatrixXd root = v * evals.asDiagonal() * v.transpose();
    return ((root + root.transpose()) * 0.5).eval();
}

namespace {

// Record order never affects a metric: everything iterates through this
// id-sorted view.
std::vector<std::size_t> sorted_order(const EmbeddingSet& set) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.records[a].id < set.records[b].id;
    });
    return order;
}

Eigen::MatrixXd primary_matrix(const EmbeddingSet& set) {
    if (set.records.empty()) {
        throw ValidationError("empty embedding set");
    }
    const auto order = sorted_order(set);
    const Eigen::Index d =
        static_cast<Eigen::Index>(set.primary(order[0]).size());
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(set.size()), d);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& v = set.primary(order[i]);
        if (static_cast<Eigen::Index>(v.size()) != d) {
            throw ValidationError("embedding dimension mismatch in set");
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            rows(static_cast<Eigen::Index>(i), c) = v[static_cast<std::size_t>(c)];
        }
    }
    return rows;
}

Eigen::MatrixXd regularize_if_needed(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov,
                                                          Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < 1e-10) {
        return cov + 1e-6 * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    }
    return cov;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace

double fid_gaussian(const GaussianSummary& a, const GaussianSummary& b) {
    if (a.mean.size() != b.mean.size()) {
        throw ValidationError("fid: dimension mismatch");
    }
    const Eigen::MatrixXd cov_a = regularize_if_needed(a.cov);
    const Eigen::MatrixXd cov_b = regularize_if_needed(b.cov);
    const Eigen::MatrixXd root_a = matrix_sqrt_psd(cov_a);
    const Eigen::MatrixXd inner = root_a * cov_b * root_a;
    const Eigen::MatrixXd cross = matrix_sqrt_psd(inner);
    const double mean_term = (a.mean - b.mean).squaredNorm();
    const double trace_term =
        cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
    const double value = mean_term + trace_term;
    if (value < 0.0) {
        log_debug("fid: clamping negative round-off " + std::to_string(value));
        return 0.0;
    }
    return value;
}

double fid(const EmbeddingSet& a, const EmbeddingSet& b) {
    const Eigen::MatrixXd rows_a = primary_matrix(a);
    const Eigen::MatrixXd rows_b = primary_matrix(b);
    if (rows_a.cols() != rows_b.cols()) {
        throw ValidationError("fid: dimension mismatch between sets");
    }
    return fid_gaussian(summarize_gaussian(rows_a),
                        summarize_gaussian(rows_b));
}

std::array<double, 3> r_precision_topk(const EmbeddingSet& pairs,
                                       int pool_size, std::uint64_t seed) {
    if (!pairs.has_pairs()) {
        throw ValidationError(
            "r_precision: every record needs text_vec and motion_vec");
    }
    const std::size_t n = pairs.size();
    if (static_cast<int>(n) < pool_size) {
        throw ValidationError("r_precision: need at least " +
                              std::to_string(pool_size) + " records, got " +
                              std::to_string(n));
    }
    const auto order = sorted_order(pairs);
    SplitMix64 rng(seed);
    std::array<long long, 3> hits = {0, 0, 0};
    std::vector<std::size_t> pool; // positions in the sorted view
    pool.reserve(static_cast<std::size_t>(pool_size));
    std::unordered_set<std::size_t> taken;
    for (std::size_t i = 0; i < n; ++i) {
        pool.clear();
        taken.clear();
        pool.push_back(i); // true text first
        taken.insert(i);
        while (pool.size() < static_cast<std::size_t>(pool_size)) {
            const std::size_t j =
                static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(n)));
            if (taken.insert(j).second) {
                pool.push_back(j);
            }
        }
        const auto& motion = pairs.records[order[i]].motion_vec;
        // rank of the true text: count pool entries strictly closer, ties
        // broken by record id (the sorted position)
        const double true_dist =
            euclidean(motion, pairs.records[order[i]].text_vec);
        int rank = 0;
        for (std::size_t p = 1; p < pool.size(); ++p) {
            const std::size_t j = pool[p];
            const double d =
                euclidean(motion, pairs.records[order[j]].text_vec);
            if (d < true_dist || (d == true_dist && j < i)) {
                ++rank;
            }
        }
        for (int k = 0; k < 3; ++k) {
            if (rank <= k) {
                ++hits[static_cast<std::size_t>(k)];
            }
        }
    }
    return {static_cast<double>(hits[0]) / static_cast<double>(n),
            static_cast<double>(hits[1]) / static_cast<double>(n),
            static_cast<double>(hits[2]) / static_cast<double>(n)};
}

double r_precision(const EmbeddingSet& pairs, int k, int pool_size,
                   std::uint64_t seed) {
    if (k < 1 || k > 3) {
        throw ValidationError("r_precision: k must be 1, 2 or 3");
    }
    return r_precision_topk(pairs, pool_size, seed)[static_cast<std::size_t>(k - 1)];
}

double mm_dist(const EmbeddingSet& pairs) {
    if (!pairs.has_pairs()) {
        throw ValidationError(
            "mm_dist: every record needs text_vec and motion_vec");
    }
    double acc = 0.0;
    for (std::size_t i : sorted_order(pairs)) {
        const EmbeddingRecord& r = pairs.records[i];
        if (r.text_vec.size() != r.motion_vec.size()) {
            throw ValidationError("mm_dist: dimension mismatch in record '" +
                                  r.id + "'");
        }
        acc += euclidean(r.text_vec, r.motion_vec);
    }
    return acc / static_cast<double>(pairs.size());
}

double diversity(const EmbeddingSet& feats, int n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) {
        throw ValidationError("diversity: n_pairs must be >= 1");
    }
    const std::size_t n = feats.size();
    if (n < 2) {
        throw ValidationError("diversity: need at least 2 records");
    }
    if (n < 2 * static_cast<std::size_t>(n_pairs)) {
        n_pairs = static_cast<int>(n / 2);
        log_warn("diversity: only " + std::to_string(n) +
                 " records, reducing n_pairs to " + std::to_string(n_pairs));
    }
    // partial Fisher-Yates over the sorted view: the first 2*n_pairs slots
    // become the sample
    std::vector<std::size_t> idx = sorted_order(feats);
    SplitMix64 rng(seed);
    const std::size_t take = 2 * static_cast<std::size_t>(n_pairs);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.bounded(
                    static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    double acc = 0.0;
    for (int p = 0; p < n_pairs; ++p) {
        const auto& a = feats.primary(idx[static_cast<std::size_t>(2 * p)]);
        const auto& b = feats.primary(idx[static_cast<std::size_t>(2 * p + 1)]);
        acc += euclidean(a, b);
    }
    return acc / static_cast<double>(n_pairs);
}

double multimodality(const EmbeddingSet& feats, int pairs_per_group,
                     std::uint64_t seed) {
    if (pairs_per_group < 1) {
        throw ValidationError("multimodality: pairs_per_group must be >= 1");
    }
    if (!feats.has_groups()) {
        throw ValidationError(
            "multimodality: every record needs a group_key");
    }
    // group order follows first appearance in the id-sorted view
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    for (std::size_t i : sorted_order(feats)) {
        const std::string& key = feats.records[i].group_key;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {i}});
        } else {
            it->second.push_back(i);
        }
    }
    SplitMix64 rng(seed);
    double group_acc = 0.0;
    int group_count = 0;
    for (const auto& [key, members] : groups) {
        if (members.size() < 2) {
            log_warn("multimodality: group '" + key +
                     "' has fewer than 2 records, skipped");
            continue;
        }
        double acc = 0.0;
        for (int p = 0; p < pairs_per_group; ++p) {
            const std::size_t a = static_cast<std::size_t>(
                rng.bounded(static_cast<std::uint64_t>(members.size())));
            std::size_t b = static_cast<std::size_t>(
                rng.bounded(static_cast<std::uint64_t>(members.size() - 1)));
            if (b >= a) {
                ++b; // distinct indices
            }
            acc += euclidean(feats.primary(members[a]),
                             feats.primary(members[b]));
        }
        group_acc += acc / static_cast<double>(pairs_per_group);
        ++group_count;
    }
    if (group_count == 0) {
        throw ValidationError("multimodality: no group has 2 or more records");
    }
    return group_acc / static_cast<double>(group_count);
}

MetricRun repeated_eval(const std::string& metric,
                        const std::function<double(std::uint64_t)>& run,
                        int reps, std::uint64_t seed) {
    if (reps < 1) {
        throw ValidationError("repeated_eval: reps must be >= 1");
    }
    MetricRun out;
    out.metric = metric;
    out.values.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        out.values.push_back(run(seed + static_cast<std::uint64_t>(i)));
    }
    double sum = 0.0;
    for (double v : out.values) sum += v;
    out.mean = sum / static_cast<double>(reps);
    if (reps == 1) {
        log_warn("repeated_eval: single repetition, ci95 reported as 0");
        out.ci95 = 0.0;
        return out;
    }
    double var = 0.0;
    for (double v : out.values) {
        const double d = v - out.mean;
        var += d * d;
    }
    const double sample_std = std::sqrt(var / static_cast<double>(reps - 1));
    out.ci95 = 1.96 * sample_std / std::sqrt(static_cast<double>(reps));
    return out;
}

} // namespace party
