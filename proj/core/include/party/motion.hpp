#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace party {

struct SkeletonSpec {
    std::string id;
    std::vector<std::string> joint_names;
    int torso_origin = 0;
    int torso_tip = 0;

    int joint_count() const { return static_cast<int>(joint_names.size()); }
    int joint_index(const std::string& name) const; // throws LookupError
    void validate() const;
};

/// Registry of shipped skeletons: "humanml3d22" (SMPL-derived 22-joint
/// ordering, pelvis=0 ... right_wrist=21) and "kitml21".
const SkeletonSpec& skeleton(const std::string& id); // throws LookupError
const SkeletonSpec* find_skeleton(const std::string& id); // nullptr if unknown
std::vector<std::string> skeleton_ids();

struct PartitionMap {
    // Ordered: iteration order is the canonical part order.
    std::vector<std::pair<std::string, std::vector<int>>> parts;
    std::map<std::string, int> end_joint;
    std::vector<std::string> angle_parts;
    int torso_origin = 0;
    int torso_tip = 0;

    bool has_part(const std::string& name) const;
    const std::vector<int>& joints(const std::string& name) const; // throws LookupError
    int end_joint_of(const std::string& name) const;               // throws LookupError

    /// All unordered part pairs, each as alphabetically ordered names,
    /// listed in alphabetical key order ("a|b" < "a|c" < ...).
    std::vector<std::pair<std::string, std::string>> pairs() const;

    static std::string pair_key(const std::string& a, const std::string& b);

    // joint sets non-empty and disjoint, end joints inside their parts,
    // angle parts known, torso indices distinct and in range
    void validate(int joint_count) const;
};

PartitionMap default_partition(const std::string& skeleton_id); // five parts
PartitionMap coarse_partition(const std::string& skeleton_id);  // arms / legs

struct MotionSequence {
    std::string skeleton_id;
    double fps = 0.0;
    int frame_count = 0;
    int joint_count = 0;
    std::vector<double> positions; // frame-major, T * J * 3

    Eigen::Vector3d pos(int t, int j) const {
        const std::size_t base =
            (static_cast<std::size_t>(t) * joint_count + j) * 3;
        return {positions[base], positions[base + 1], positions[base + 2]};
    }
    void set_pos(int t, int j, const Eigen::Vector3d& p) {
        const std::size_t base =
            (static_cast<std::size_t>(t) * joint_count + j) * 3;
        positions[base] = p.x();
        positions[base + 1] = p.y();
        positions[base + 2] = p.z();
    }

    // T >= 2, J matches the declared skeleton, all coordinates finite
    void validate() const;
};

MotionSequence make_motion_sequence(std::string skeleton_id, double fps,
                                    int frames, int joints,
                                    std::vector<double> positions);

Eigen::Vector3d part_centroid(const MotionSequence& seq,
                              const PartitionMap& partition,
                              const std::string& part, int t);

} // namespace party
