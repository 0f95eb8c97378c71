#pragma once

// Synthetic inputs shared by the unit and acceptance suites. The generators
// consume splitmix64 streams in a fixed order (documented per function) so
// expected values frozen from an external reference stay reproducible.

#include "party/motion.hpp"
#include "party/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace party::testing {

// standing pose, meters, y-up, humanml3d22 joint order
inline const std::array<std::array<double, 3>, 22> kBasePose = {{
    {0.00, 0.95, 0.00},   // pelvis
    {0.09, 0.91, 0.00},   // left_hip
    {-0.09, 0.91, 0.00},  // right_hip
    {0.00, 1.05, 0.00},   // spine1
    {0.10, 0.52, 0.00},   // left_knee
    {-0.10, 0.52, 0.00},  // right_knee
    {0.00, 1.15, 0.00},   // spine2
    {0.10, 0.12, 0.00},   // left_ankle
    {-0.10, 0.12, 0.00},  // right_ankle
    {0.00, 1.25, 0.00},   // spine3
    {0.11, 0.03, 0.12},   // left_foot
    {-0.11, 0.03, 0.12},  // right_foot
    {0.00, 1.40, 0.00},   // neck
    {0.06, 1.35, 0.00},   // left_collar
    {-0.06, 1.35, 0.00},  // right_collar
    {0.00, 1.55, 0.00},   // head
    {0.16, 1.38, 0.00},   // left_shoulder
    {-0.16, 1.38, 0.00},  // right_shoulder
    {0.22, 1.12, 0.00},   // left_elbow
    {-0.22, 1.12, 0.00},  // right_elbow
    {0.25, 0.88, 0.00},   // left_wrist
    {-0.25, 0.88, 0.00},  // right_wrist
}};

inline MotionSequence base_pose_motion(int frames) {
    std::vector<double> positions;
    positions.reserve(static_cast<std::size_t>(frames) * 22 * 3);
    for (int t = 0; t < frames; ++t) {
        for (const auto& p : kBasePose) {
            positions.push_back(p[0]);
            positions.push_back(p[1]);
            positions.push_back(p[2]);
        }
    }
    return make_motion_sequence("humanml3d22", 20.0, frames, 22,
                                std::move(positions));
}

/// Every joint displaces along x by
///   v(t) = 1 + 0.3 (sin(2 pi t/9.3) + sin(2 pi t/6.1) + sin(2 pi t/4.3)),
/// t = 1..T-1, so every part shares one phase-locked velocity profile.
inline MotionSequence phase_locked_motion(int frames = 200) {
    MotionSequence seq = base_pose_motion(frames);
    double offset = 0.0;
    for (int t = 1; t < frames; ++t) {
        const double x = static_cast<double>(t);
        const double v =
            1.0 + 0.3 * (std::sin(2.0 * std::numbers::pi * x / 9.3) +
                         std::sin(2.0 * std::numbers::pi * x / 6.1) +
                         std::sin(2.0 * std::numbers::pi * x / 4.3));
        offset += v;
        for (int j = 0; j < 22; ++j) {
            Eigen::Vector3d p = seq.pos(0, j);
            p.x() += offset;
            seq.set_pos(t, j, p);
        }
    }
    return seq;
}

/// Each of the five parts displaces rigidly along x by an independent
/// gaussian per frame. Stream order: for t in 1..T-1, for part in
/// (left_arm, right_arm, left_leg, right_leg, backbone), one gaussian.
inline MotionSequence white_noise_motion(std::uint64_t seed, int frames = 200) {
    static const std::array<std::vector<int>, 5> kParts = {{
        {13, 16, 18, 20}, // left_arm
        {14, 17, 19, 21}, // right_arm
        {1, 4, 7, 10},    // left_leg
        {2, 5, 8, 11},    // right_leg
        {0, 3, 6, 9, 12, 15}, // backbone
    }};
    MotionSequence seq = base_pose_motion(frames);
    SplitMix64 rng(seed);
    std::array<double, 5> offsets = {0, 0, 0, 0, 0};
    for (int t = 1; t < frames; ++t) {
        for (std::size_t g = 0; g < kParts.size(); ++g) {
            offsets[g] += rng.gaussian();
            for (int j : kParts[g]) {
                Eigen::Vector3d p = seq.pos(0, j);
                p.x() += offsets[g];
                seq.set_pos(t, j, p);
            }
        }
    }
    return seq;
}

/// Standing pose with per-coordinate jitter and a slow x drift:
///   p[t][j][ax] = base + 0.01*t*(ax==0) + 0.02*uniform(-1,1)
/// Stream order: for t, for j in 0..21, for ax in 0..2.
inline MotionSequence jittered_pose_motion(std::uint64_t seed,
                                           int frames = 100) {
    SplitMix64 rng(seed);
    std::vector<double> positions;
    positions.reserve(static_cast<std::size_t>(frames) * 22 * 3);
    for (int t = 0; t < frames; ++t) {
        const double drift = 0.01 * static_cast<double>(t);
        for (int j = 0; j < 22; ++j) {
            for (int ax = 0; ax < 3; ++ax) {
                const double base =
                    kBasePose[static_cast<std::size_t>(j)]
                             [static_cast<std::size_t>(ax)] +
                    (ax == 0 ? drift : 0.0);
                positions.push_back(base + 0.02 * rng.uniform(-1.0, 1.0));
            }
        }
    }
    return make_motion_sequence("humanml3d22", 20.0, frames, 22,
                                std::move(positions));
}

/// Seeded random-walk motion with a random valid frame count in [30, 250].
inline MotionSequence random_walk_motion(std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int frames = 30 + static_cast<int>(rng.bounded(221));
    MotionSequence seq = base_pose_motion(frames);
    for (int t = 1; t < frames; ++t) {
        for (int j = 0; j < 22; ++j) {
            Eigen::Vector3d p = seq.pos(t - 1, j);
            for (int ax = 0; ax < 3; ++ax) {
                p[ax] += 0.05 * rng.gaussian();
            }
            seq.set_pos(t, j, p);
        }
    }
    return seq;
}

inline Eigen::Matrix3d rotation_xyz(double ax, double ay, double az) {
    Eigen::Matrix3d rx, ry, rz;
    rx << 1, 0, 0, 0, std::cos(ax), -std::sin(ax), 0, std::sin(ax), std::cos(ax);
    ry << std::cos(ay), 0, std::sin(ay), 0, 1, 0, -std::sin(ay), 0, std::cos(ay);
    rz << std::cos(az), -std::sin(az), 0, std::sin(az), std::cos(az), 0, 0, 0, 1;
    return rz * ry * rx;
}

inline MotionSequence rigid_transformed(const MotionSequence& seq,
                                        const Eigen::Matrix3d& rot,
                                        const Eigen::Vector3d& shift) {
    MotionSequence out = seq;
    for (int t = 0; t < seq.frame_count; ++t) {
        for (int j = 0; j < seq.joint_count; ++j) {
            out.set_pos(t, j, rot * seq.pos(t, j) + shift);
        }
    }
    return out;
}

inline MotionSequence scaled(const MotionSequence& seq, double factor) {
    MotionSequence out = seq;
    for (double& v : out.positions) {
        v *= factor;
    }
    return out;
}

} // namespace party::testing
