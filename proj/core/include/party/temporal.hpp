#pragma once

#include "party/motion.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace party {

struct CoherenceParams {
    int window_len = 20;     // L, frames
    int stride = 10;         // frames, L/2 by default
    int tau_max = 15;        // frames
    double sigma = 0.1;      // softmax temperature over lags
    double kappa = 5.0;      // lag penalty scale, frames
    double beta_d = 1.5;     // distance kernel bandwidth
    double beta_theta = 1.5; // angle kernel bandwidth
    double epsilon = 1e-8;   // numerical floor

    void validate() const;
    /// Partial JSON: absent keys keep their defaults.
    /// {"L":20,"stride":10,"tau_max":15,"sigma":0.1,"kappa":5.0,
    ///  "beta_d":1.5,"beta_theta":1.5,"epsilon":1e-8}
    static CoherenceParams from_json(std::string_view text);
    std::string to_json() const;
};

struct FrameRange {
    int begin = 0;
    int end = 0; // half-open
    int length() const { return end - begin; }
    bool operator==(const FrameRange&) const = default;
};

/// Per-part RMS displacement magnitude between consecutive frames;
/// output length is frame_count - 1, entry t covers frames t -> t+1.
std::vector<double> rms_velocity(const MotionSequence& seq,
                                 const PartitionMap& partition,
                                 const std::string& part);

/// Length-L ranges starting at multiples of the stride. A series shorter
/// than L yields one full-span window. A leftover tail shorter than L/2
/// (or shorter than 2 samples) merges into the last window; longer tails
/// become a final partial window.
std::vector<FrameRange> sliding_windows(int series_len, int window_len,
                                        int stride);

/// (x - mean) / (population std + epsilon) over the window.
std::vector<double> znorm_window(std::span<const double> series,
                                 FrameRange window, double epsilon);

/// r(tau) for tau in [-tau_max, tau_max]; lagged samples that fall outside
/// the window contribute zero while the denominator keeps the full-window
/// norms. A (near-)zero-norm input yields r == 0 for every lag.
std::vector<double> cross_correlation(std::span<const double> s_g,
                                      std::span<const double> s_h,
                                      int tau_max);

/// Softmax-weighted lag aggregation: weights w(tau) = softmax(r(tau)/sigma),
/// R = sum w*r, <|tau|> = sum w*|tau|, result max(0,R)*exp(-<|tau|>/kappa).
double refined_correlation(std::span<const double> lag_profile, double sigma,
                           double kappa);

struct TemporalReport {
    double score = 0.0;                         // mean of per_window_pair
    std::vector<FrameRange> windows;            // velocity-series spans
    std::vector<std::string> pair_keys;         // "a|b", alphabetical
    std::vector<std::vector<double>> per_window_pair; // [window][pair]
};

/// Needs frame_count >= 3 (two velocity samples).
TemporalReport temporal_coherence(const MotionSequence& seq,
                                  const PartitionMap& partition,
                                  const CoherenceParams& params);

} // namespace party
