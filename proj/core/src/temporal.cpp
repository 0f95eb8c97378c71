#include "party/temporal.hpp"

#include "party/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace party {

using nlohmann::json;

void CoherenceParams::validate() const {
    if (window_len < 2) {
        throw ValidationError("coherence params: L must be >= 2");
    }
    if (stride < 1 || stride > window_len) {
        throw ValidationError("coherence params: stride must be in [1, L]");
    }
    if (tau_max < 0 || tau_max >= window_len) {
        throw ValidationError("coherence params: tau_max must be in [0, L)");
    }
    if (!(sigma > 0.0)) {
        throw ValidationError("coherence params: sigma must be > 0");
    }
    if (!(kappa > 0.0)) {
        throw ValidationError("coherence params: kappa must be > 0");
    }
    if (!(beta_d > 0.0) || !(beta_theta > 0.0)) {
        throw ValidationError("coherence params: beta_d and beta_theta must be > 0");
    }
    if (!(epsilon > 0.0)) {
        throw ValidationError("coherence params: epsilon must be > 0");
    }
}

CoherenceParams CoherenceParams::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("coherence params: malformed JSON: ") +
                         e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("coherence params: expected a JSON object");
    }
    CoherenceParams p;
    bool explicit_stride = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "L") {
            p.window_len = value.get<int>();
        } else if (key == "stride") {
            p.stride = value.get<int>();
            explicit_stride = true;
        } else if (key == "tau_max") {
            p.tau_max = value.get<int>();
        } else if (key == "sigma") {
            p.sigma = value.get<double>();
        } else if (key == "kappa") {
            p.kappa = value.get<double>();
        } else if (key == "beta_d") {
            p.beta_d = value.get<double>();
        } else if (key == "beta_theta") {
            p.beta_theta = value.get<double>();
        } else if (key == "epsilon") {
            p.epsilon = value.get<double>();
        } else {
            throw ValidationError("coherence params: unknown key '" + key + "'");
        }
    }
    if (!explicit_stride) {
        p.stride = std::max(1, p.window_len / 2);
    }
    p.validate();
    return p;
}

std::string CoherenceParams::to_json() const {
    json doc;
    doc["L"] = window_len;
    doc["stride"] = stride;
    doc["tau_max"] = tau_max;
    doc["sigma"] = sigma;
    doc["kappa"] = kappa;
    doc["beta_d"] = beta_d;
    doc["beta_theta"] = beta_theta;
    doc["epsilon"] = epsilon;
    return doc.dump();
}

std::vector<double> rms_velocity(const MotionSequence& seq,
                                 const PartitionMap& partition,
                                 const std::string& part) {
    if (seq.frame_count < 2) {
        throw InsufficientFramesError(
            "rms_velocity needs at least 2 frames, got " +
            std::to_string(seq.frame_count));
    }
    const auto& js = partition.joints(part);
    const double inv_n = 1.0 / static_cast<double>(js.size());
    std::vector<double> out(static_cast<std::size_t>(seq.frame_count - 1));
    for (int t = 1; t < seq.frame_count; ++t) {
        double acc = 0.0;
        for (int j : js) {
            acc += (seq.pos(t, j) - seq.pos(t - 1, j)).squaredNorm();
        }
        out[static_cast<std::size_t>(t - 1)] = std::sqrt(acc * inv_n);
    }
    return out;
}

std::vector<FrameRange> sliding_windows(int series_len, int window_len,
                                        int stride) {
    if (series_len < 2) {
        throw ValidationError("sliding_windows needs a series of length >= 2");
    }
    if (series_len <= window_len) {
        return {{0, series_len}};
    }
    const int last_start = stride * ((series_len - window_len) / stride);
    std::vector<FrameRange> out;
    for (int s = 0; s <= last_start; s += stride) {
        out.push_back({s, s + window_len});
    }
    const int tail = series_len - (last_start + window_len);
    if (tail > 0) {
        if (2 * tail >= window_len && tail >= 2) {
            out.push_back({last_start + window_len, series_len});
        } else {
            out.back().end = series_len;
        }
    }
    return out;
}

std::vector<double> znorm_window(std::span<const double> series,
                                 FrameRange window, double epsilon) {
    if (window.begin < 0 || window.end > static_cast<int>(series.size()) ||
        window.length() < 1) {
        throw ValidationError("znorm_window: window out of series bounds");
    }
    const int n = window.length();
    double mean = 0.0;
    for (int t = window.begin; t < window.end; ++t) {
        mean += series[static_cast<std::size_t>(t)];
    }
    mean /= n;
    double var = 0.0;
    for (int t = window.begin; t < window.end; ++t) {
        const double d = series[static_cast<std::size_t>(t)] - mean;
        var += d * d;
    }
    const double denom = std::sqrt(var / n) + epsilon;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)] =
            (series[static_cast<std::size_t>(window.begin + t)] - mean) / denom;
    }
    return out;
}

std::vector<double> cross_correlation(std::span<const double> s_g,
                                      std::span<const double> s_h,
                                      int tau_max) {
    if (s_g.size() != s_h.size() || s_g.size() < 2) {
        throw ValidationError(
            "cross_correlation: series must share a length >= 2");
    }
    const int n = static_cast<int>(s_g.size());
    double norm_g = 0.0;
    double norm_h = 0.0;
    for (int t = 0; t < n; ++t) {
        norm_g += s_g[static_cast<std::size_t>(t)] * s_g[static_cast<std::size_t>(t)];
        norm_h += s_h[static_cast<std::size_t>(t)] * s_h[static_cast<std::size_t>(t)];
    }
    norm_g = std::sqrt(norm_g);
    norm_h = std::sqrt(norm_h);
    std::vector<double> out(static_cast<std::size_t>(2 * tau_max + 1), 0.0);
    // A z-normed constant series is identically zero: no rhythm to correlate.
    if (norm_g <= 1e-12 || norm_h <= 1e-12) {
        return out;
    }
    const double inv = 1.0 / (norm_g * norm_h);
    for (int tau = -tau_max; tau <= tau_max; ++tau) {
        const int lo = std::max(0, -tau);
        const int hi = std::min(n, n - tau);
        double acc = 0.0;
        for (int t = lo; t < hi; ++t) {
            acc += s_g[static_cast<std::size_t>(t)] *
                   s_h[static_cast<std::size_t>(t + tau)];
        }
        out[static_cast<std::size_t>(tau + tau_max)] = acc * inv;
    }
    return out;
}

double refined_correlation(std::span<const double> lag_profile, double sigma,
                           double kappa) {
    if (lag_profile.empty() || lag_profile.size() % 2 == 0) {
        throw ValidationError(
            "refined_correlation: profile must cover [-tau_max, tau_max]");
    }
    const int tau_max = (static_cast<int>(lag_profile.size()) - 1) / 2;
    const double peak = *std::max_element(lag_profile.begin(), lag_profile.end());
    double z = 0.0;
    double mean_r = 0.0;
    double mean_abs_tau = 0.0;
    for (int tau = -tau_max; tau <= tau_max; ++tau) {
        const double r = lag_profile[static_cast<std::size_t>(tau + tau_max)];
        const double w = std::exp((r - peak) / sigma);
        z += w;
        mean_r += w * r;
        mean_abs_tau += w * std::abs(static_cast<double>(tau));
    }
    mean_r /= z;
    mean_abs_tau /= z;
    return std::max(0.0, mean_r) * std::exp(-mean_abs_tau / kappa);
}

TemporalReport temporal_coherence(const MotionSequence& seq,
                                  const PartitionMap& partition,
                                  const CoherenceParams& params) {
    params.validate();
    partition.validate(seq.joint_count);
    if (partition.parts.size() < 2) {
        throw ValidationError(
            "temporal_coherence needs at least 2 parts to form pairs");
    }
    if (seq.frame_count < 3) {
        throw InsufficientFramesError(
            "temporal_coherence needs at least 3 frames, got " +
            std::to_string(seq.frame_count));
    }

    std::vector<std::vector<double>> velocities;
    velocities.reserve(partition.parts.size());
    for (const auto& [name, _] : partition.parts) {
        velocities.push_back(rms_velocity(seq, partition, name));
    }
    const int series_len = static_cast<int>(velocities.front().size());

    TemporalReport report;
    report.windows =
        sliding_windows(series_len, params.window_len, params.stride);

    // pair index i,j refers to the canonical part order; keys are sorted
    const auto pair_names = partition.pairs();
    std::vector<std::pair<int, int>> pair_indices;
    auto part_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < partition.parts.size(); ++i) {
            if (partition.parts[i].first == name) return static_cast<int>(i);
        }
        throw LookupError("unknown part '" + name + "'");
    };
    for (const auto& [a, b] : pair_names) {
        report.pair_keys.push_back(PartitionMap::pair_key(a, b));
        pair_indices.emplace_back(part_index(a), part_index(b));
    }

    double total = 0.0;
    for (const FrameRange& window : report.windows) {
        std::vector<std::vector<double>> normed;
        normed.reserve(velocities.size());
        for (const auto& v : velocities) {
            normed.push_back(znorm_window(v, window, params.epsilon));
        }
        std::vector<double> row;
        row.reserve(pair_indices.size());
        for (const auto& [gi, hi] : pair_indices) {
            const auto profile =
                cross_correlation(normed[static_cast<std::size_t>(gi)],
                                  normed[static_cast<std::size_t>(hi)],
                                  params.tau_max);
            const double refined =
                refined_correlation(profile, params.sigma, params.kappa);
            row.push_back(refined);
            total += refined;
        }
        report.per_window_pair.push_back(std::move(row));
    }
    report.score = total / (static_cast<double>(report.windows.size()) *
                            static_cast<double>(pair_indices.size()));
    return report;
}

} // namespace party
