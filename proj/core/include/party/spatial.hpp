#pragma once

#include "party/motion.hpp"
#include "party/temporal.hpp" // CoherenceParams

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace party {

struct Moments {
    double mean = 0.0;
    double std = 0.0; // population std, may be 0 for constant corpora
};

struct RefStats {
    std::string skeleton_id;
    long long sample_count = 0;          // pooled frames across the corpus
    std::string corpus_digest;           // content hash, hex
    std::map<std::string, Moments> pair_stats;  // "a|b" -> distance moments
    std::map<std::string, Moments> angle_stats; // part -> angle moments
    std::vector<std::string> warnings;   // keys degraded during the build

    void validate() const;
};

struct NamedSequence {
    std::string id;
    MotionSequence seq;
};

double inter_part_distance(const MotionSequence& seq,
                           const PartitionMap& partition,
                           const std::string& g, const std::string& h, int t);

/// Angle between the part direction (centroid -> end joint) and the torso
/// axis, in [0, pi]. Throws DegenerateGeometryError when either direction
/// collapses below the numerical floor.
double part_torso_angle(const MotionSequence& seq,
                        const PartitionMap& partition, const std::string& g,
                        int t, double epsilon = 1e-8);

/// Pooled per-frame distances and angles over the corpus, reduced in sorted
/// sequence-id order so any input permutation yields bit-identical stats.
RefStats build_reference_stats(std::span<const NamedSequence> corpus,
                               const PartitionMap& partition,
                               double epsilon = 1e-8);

/// exp(-z^2 / beta^2)
double consistency_score(double z, double beta);

struct SpatialReport {
    double score = 0.0;
    std::vector<double> per_frame;
    std::map<std::string, double> pair_term_means;  // mean kernel per pair
    std::map<std::string, double> angle_term_means; // mean kernel per part
    std::map<std::string, std::vector<int>> degenerate_frames; // part -> frames
};

SpatialReport spatial_coherence(const MotionSequence& seq,
                                const PartitionMap& partition,
                                const RefStats& stats,
                                const CoherenceParams& params);

/// {"skeleton":...,"count":N,"digest":"...","pairs":{"a|b":{"mean":m,"std":s}},
///  "angles":{"part":{"mean":m,"std":s}}}
std::string ref_stats_to_json(const RefStats& stats);
RefStats ref_stats_from_json(std::string_view text);

} // namespace party
