#pragma once

#include "party/embeddings.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace party {

struct GaussianSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov; // sample covariance (n - 1 normalization)
    std::size_t n = 0;
};

GaussianSummary summarize_gaussian(const Eigen::MatrixXd& rows);

/// Symmetric PSD square root via self-adjoint eigendecomposition.
/// Eigenvalues below zero are clipped; asymmetry beyond a small relative
/// tolerance is rejected.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// ||mu1-mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2); small negative
/// round-off is clamped to zero. Near-singular covariances get 1e-6 I added
/// before the root.
double fid_gaussian(const GaussianSummary& a, const GaussianSummary& b);
double fid(const EmbeddingSet& a, const EmbeddingSet& b);

/// For each record: pool of its true text vector plus pool_size-1 distinct
/// mismatched text vectors (seeded), ranked by Euclidean distance to the
/// motion vector, distance ties broken by record index. Returns the top-1/2/3
/// hit rates in one pass.
std::array<double, 3> r_precision_topk(const EmbeddingSet& pairs,
                                       int pool_size, std::uint64_t seed);
double r_precision(const EmbeddingSet& pairs, int k, int pool_size,
                   std::uint64_t seed);

/// Mean Euclidean distance between each text vector and its paired motion
/// vector.
double mm_dist(const EmbeddingSet& pairs);

/// Mean distance over n_pairs disjoint seeded random pairs. Fewer than
/// 2*n_pairs records shrinks n_pairs to floor(n/2) with a warning.
double diversity(const EmbeddingSet& feats, int n_pairs, std::uint64_t seed);

/// Mean within-group pair distance averaged over groups; groups smaller
/// than 2 are skipped with a warning.
double multimodality(const EmbeddingSet& feats, int pairs_per_group,
                     std::uint64_t seed);

struct MetricRun {
    std::string metric;
    std::vector<double> values;
    double mean = 0.0;
    double ci95 = 0.0; // 1.96 * sample std / sqrt(reps); 0 when reps == 1
};

MetricRun repeated_eval(const std::string& metric,
                        const std::function<double(std::uint64_t)>& run,
                        int reps, std::uint64_t seed);

} // namespace party
