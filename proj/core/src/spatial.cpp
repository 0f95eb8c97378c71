#include "party/spatial.hpp"

#include "party/errors.hpp"
#include "party/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>

namespace party {

using nlohmann::json;

void RefStats::validate() const {
    if (sample_count < 2) {
        throw ValidationError("reference stats need sample_count >= 2");
    }
    for (const auto& [key, m] : pair_stats) {
        if (m.std < 0.0 || !std::isfinite(m.mean) || !std::isfinite(m.std)) {
            throw ValidationError("reference stats: bad moments for pair '" +
                                  key + "'");
        }
    }
    for (const auto& [key, m] : angle_stats) {
        if (m.std < 0.0 || !std::isfinite(m.mean) || !std::isfinite(m.std)) {
            throw ValidationError("reference stats: bad moments for angle '" +
                                  key + "'");
        }
    }
}

double inter_part_distance(const MotionSequence& seq,
                           const PartitionMap& partition,
                           const std::string& g, const std::string& h, int t) {
    if (g == h) {
        throw ValidationError("inter_part_distance: parts must differ");
    }
    return (part_centroid(seq, partition, g, t) -
            part_centroid(seq, partition, h, t))
        .norm();
}

double part_torso_angle(const MotionSequence& seq,
                        const PartitionMap& partition, const std::string& g,
                        int t, double epsilon) {
    const Eigen::Vector3d centroid = part_centroid(seq, partition, g, t);
    const Eigen::Vector3d direction =
        seq.pos(t, partition.end_joint_of(g)) - centroid;
    const Eigen::Vector3d torso =
        seq.pos(t, partition.torso_tip) - seq.pos(t, partition.torso_origin);
    const double dn = direction.norm();
    const double tn = torso.norm();
    if (dn <= epsilon || tn <= epsilon) {
        throw DegenerateGeometryError("degenerate direction for part '" + g +
                                      "' at frame " + std::to_string(t));
    }
    const double c = std::clamp(direction.dot(torso) / (dn * tn), -1.0, 1.0);
    return std::acos(c);
}

namespace {

// FNV-1a 64 over a canonical byte stream of the sorted corpus.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= bytes[i];
            hash_ *= 0x100000001B3ULL;
        }
    }
    void update_string(const std::string& s) {
        update(s.data(), s.size());
        const char zero = '\0';
        update(&zero, 1);
    }
    void update_double(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        update(&bits, sizeof bits);
    }
    void update_i64(std::int64_t v) { update(&v, sizeof v); }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(hash_));
        return buf;
    }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

Moments population_moments(const std::vector<double>& values) {
    Moments m;
    if (values.empty()) {
        return m;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) {
        const double d = v - m.mean;
        var += d * d;
    }
    m.std = std::sqrt(var / static_cast<double>(values.size()));
    return m;
}

} // namespace

RefStats build_reference_stats(std::span<const NamedSequence> corpus,
                               const PartitionMap& partition,
                               double epsilon) {
    if (corpus.empty()) {
        throw ValidationError("reference stats: empty corpus");
    }
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return corpus[a].id < corpus[b].id;
    });

    const std::string& skeleton_id = corpus[order[0]].seq.skeleton_id;
    const auto pairs = partition.pairs();

    std::map<std::string, std::vector<double>> pooled_d;
    std::map<std::string, std::vector<double>> pooled_t;
    for (const auto& [a, b] : pairs) {
        pooled_d[PartitionMap::pair_key(a, b)] = {};
    }
    for (const auto& g : partition.angle_parts) {
        pooled_t[g] = {};
    }

    Fnv1a64 digest;
    long long frames = 0;
    for (std::size_t k : order) {
        const auto& [id, seq] = corpus[k];
        if (seq.skeleton_id != skeleton_id) {
            throw ValidationError("reference stats: mixed skeletons ('" +
                                  skeleton_id + "' vs '" + seq.skeleton_id +
                                  "' in sequence '" + id + "')");
        }
        partition.validate(seq.joint_count);
        digest.update_string(id);
        digest.update_string(seq.skeleton_id);
        digest.update_double(seq.fps);
        digest.update_i64(seq.frame_count);
        digest.update_i64(seq.joint_count);
        for (double v : seq.positions) {
            digest.update_double(v);
        }
        frames += seq.frame_count;
        for (int t = 0; t < seq.frame_count; ++t) {
            for (const auto& [a, b] : pairs) {
                pooled_d[PartitionMap::pair_key(a, b)].push_back(
                    inter_part_distance(seq, partition, a, b, t));
            }
            for (const auto& g : partition.angle_parts) {
                try {
                    pooled_t[g].push_back(
                        part_torso_angle(seq, partition, g, t, epsilon));
                } catch (const DegenerateGeometryError&) {
                    // excluded from the pool
                }
            }
        }
    }

    RefStats stats;
    stats.skeleton_id = skeleton_id;
    stats.sample_count = frames;
    stats.corpus_digest = digest.hex();
    for (const auto& [key, values] : pooled_d) {
        stats.pair_stats[key] = population_moments(values);
    }
    for (const auto& [key, values] : pooled_t) {
        if (values.empty()) {
            stats.angle_stats[key] = Moments{0.0, epsilon};
            stats.warnings.push_back("angle '" + key +
                                     "' degenerate on every frame");
            log_warn("reference stats: angle '" + key +
                     "' degenerate on every corpus frame");
            continue;
        }
        stats.angle_stats[key] = population_moments(values);
    }
    stats.validate();
    return stats;
}

double consistency_score(double z, double beta) {
    if (!(beta > 0.0)) {
        throw ValidationError("consistency_score: beta must be > 0");
    }
    return std::exp(-(z * z) / (beta * beta));
}

SpatialReport spatial_coherence(const MotionSequence& seq,
                                const PartitionMap& partition,
                                const RefStats& stats,
                                const CoherenceParams& params) {
    params.validate();
    partition.validate(seq.joint_count);
    if (partition.parts.size() < 2) {
        throw ValidationError(
            "spatial_coherence needs at least 2 parts to form pairs");
    }
    if (seq.skeleton_id != stats.skeleton_id) {
        throw ValidationError("spatial_coherence: sequence skeleton '" +
                              seq.skeleton_id + "' does not match stats '" +
                              stats.skeleton_id + "'");
    }
    const auto pairs = partition.pairs();
    for (const auto& [a, b] : pairs) {
        if (!stats.pair_stats.count(PartitionMap::pair_key(a, b))) {
            throw ValidationError("spatial_coherence: stats missing pair '" +
                                  PartitionMap::pair_key(a, b) + "'");
        }
    }
    for (const auto& g : partition.angle_parts) {
        if (!stats.angle_stats.count(g)) {
            throw ValidationError("spatial_coherence: stats missing angle '" +
                                  g + "'");
        }
    }

    SpatialReport report;
    report.per_frame.reserve(static_cast<std::size_t>(seq.frame_count));
    std::map<std::string, double> pair_sums;
    std::map<std::string, double> angle_sums;
    std::map<std::string, int> angle_counts;

    for (int t = 0; t < seq.frame_count; ++t) {
        double acc = 0.0;
        int terms = 0;
        for (const auto& [a, b] : pairs) {
            const std::string key = PartitionMap::pair_key(a, b);
            const Moments& m = stats.pair_stats.at(key);
            const double d = inter_part_distance(seq, partition, a, b, t);
            const double z = (d - m.mean) / (m.std + params.epsilon);
            const double s = consistency_score(z, params.beta_d);
            pair_sums[key] += s;
            acc += s;
            ++terms;
        }
        for (const auto& g : partition.angle_parts) {
            double theta;
            try {
                theta = part_torso_angle(seq, partition, g, t, params.epsilon);
            } catch (const DegenerateGeometryError&) {
                // geometry failure is not incoherence evidence: drop the term
                // and renormalize this frame
                report.degenerate_frames[g].push_back(t);
                continue;
            }
            const Moments& m = stats.angle_stats.at(g);
            const double z = (theta - m.mean) / (m.std + params.epsilon);
            const double s = consistency_score(z, params.beta_theta);
            angle_sums[g] += s;
            angle_counts[g] += 1;
            acc += s;
            ++terms;
        }
        report.per_frame.push_back(acc / static_cast<double>(terms));
    }

    double total = 0.0;
    for (double v : report.per_frame) total += v;
    report.score = total / static_cast<double>(report.per_frame.size());

    for (const auto& [key, sum] : pair_sums) {
        report.pair_term_means[key] = sum / static_cast<double>(seq.frame_count);
    }
    for (const auto& [key, sum] : angle_sums) {
        report.angle_term_means[key] = sum / angle_counts.at(key);
    }
    return report;
}

std::string ref_stats_to_json(const RefStats& stats) {
    json doc;
    doc["skeleton"] = stats.skeleton_id;
    doc["count"] = stats.sample_count;
    doc["digest"] = stats.corpus_digest;
    json pairs = json::object();
    for (const auto& [key, m] : stats.pair_stats) {
        pairs[key] = {{"mean", m.mean}, {"std", m.std}};
    }
    doc["pairs"] = std::move(pairs);
    json angles = json::object();
    for (const auto& [key, m] : stats.angle_stats) {
        angles[key] = {{"mean", m.mean}, {"std", m.std}};
    }
    doc["angles"] = std::move(angles);
    if (!stats.warnings.empty()) {
        doc["warnings"] = stats.warnings;
    }
    return doc.dump(2) + "\n";
}

RefStats ref_stats_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("reference stats: malformed JSON: ") +
                         e.what());
    }
    if (!doc.is_object() || !doc.contains("skeleton") || !doc.contains("pairs") ||
        !doc.contains("angles") || !doc.contains("count")) {
        throw ValidationError(
            "reference stats: need skeleton, count, pairs, angles");
    }
    RefStats stats;
    stats.skeleton_id = doc["skeleton"].get<std::string>();
    stats.sample_count = doc["count"].get<long long>();
    stats.corpus_digest = doc.value("digest", std::string());
    for (const auto& [key, m] : doc["pairs"].items()) {
        stats.pair_stats[key] = {m.at("mean").get<double>(),
                                 m.at("std").get<double>()};
    }
    for (const auto& [key, m] : doc["angles"].items()) {
        stats.angle_stats[key] = {m.at("mean").get<double>(),
                                  m.at("std").get<double>()};
    }
    if (doc.contains("warnings")) {
        for (const auto& w : doc["warnings"]) {
            stats.warnings.push_back(w.get<std::string>());
        }
    }
    stats.validate();
    return stats;
}

} // namespace party
