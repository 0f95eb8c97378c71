#include "party/motion.hpp"

#include "party/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace party {

int SkeletonSpec::joint_index(const std::string& name) const {
    for (std::size_t i = 0; i < joint_names.size(); ++i) {
        if (joint_names[i] == name) {
            return static_cast<int>(i);
        }
    }
    throw LookupError("unknown joint name '" + name + "' in skeleton '" + id + "'");
}

void SkeletonSpec::validate() const {
    if (joint_names.empty()) {
        throw ValidationError("skeleton '" + id + "' has no joints");
    }
    std::set<std::string> seen(joint_names.begin(), joint_names.end());
    if (seen.size() != joint_names.size()) {
        throw ValidationError("skeleton '" + id + "' has duplicate joint names");
    }
    const int j = joint_count();
    if (torso_origin < 0 || torso_origin >= j || torso_tip < 0 || torso_tip >= j) {
        throw ValidationError("skeleton '" + id + "' torso indices out of range");
    }
    if (torso_origin == torso_tip) {
        throw ValidationError("skeleton '" + id + "' torso origin equals tip");
    }
}

namespace {

SkeletonSpec make_humanml3d22() {
    SkeletonSpec s;
    s.id = "humanml3d22";
    s.joint_names = {
        "pelvis",         // 0
        "left_hip",       // 1
        "right_hip",      // 2
        "spine1",         // 3
        "left_knee",      // 4
        "right_knee",     // 5
        "spine2",         // 6
        "left_ankle",     // 7
        "right_ankle",    // 8
        "spine3",         // 9
        "left_foot",      // 10
        "right_foot",     // 11
        "neck",           // 12
        "left_collar",    // 13
        "right_collar",   // 14
        "head",           // 15
        "left_shoulder",  // 16
        "right_shoulder", // 17
        "left_elbow",     // 18
        "right_elbow",    // 19
        "left_wrist",     // 20
        "right_wrist",    // 21
    };
    s.torso_origin = 0;  // pelvis
    s.torso_tip = 12;    // neck
    return s;
}

SkeletonSpec make_kitml21() {
    SkeletonSpec s;
    s.id = "kitml21";
    s.joint_names = {
        "pelvis",          // 0
        "spine_belly",     // 1
        "spine_chest",     // 2
        "neck",            // 3
        "head",            // 4
        "left_shoulder",   // 5
        "left_elbow",      // 6
        "left_wrist",      // 7
        "right_shoulder",  // 8
        "right_elbow",     // 9
        "right_wrist",     // 10
        "left_hip",        // 11
        "left_knee",       // 12
        "left_ankle",      // 13
        "left_midfoot",    // 14
        "left_foot",       // 15
        "right_hip",       // 16
        "right_knee",      // 17
        "right_ankle",     // 18
        "right_midfoot",   // 19
        "right_foot",      // 20
    };
    s.torso_origin = 0;  // pelvis
    s.torso_tip = 3;     // neck
    return s;
}

} // namespace

const SkeletonSpec* find_skeleton(const std::string& id) {
    static const SkeletonSpec humanml = make_humanml3d22();
    static const SkeletonSpec kitml = make_kitml21();
    if (id == humanml.id) return &humanml;
    if (id == kitml.id) return &kitml;
    return nullptr;
}

const SkeletonSpec& skeleton(const std::string& id) {
    const SkeletonSpec* spec = find_skeleton(id);
    if (spec == nullptr) {
        throw LookupError("unknown skeleton '" + id + "'");
    }
    return *spec;
}

std::vector<std::string> skeleton_ids() {
    return {"humanml3d22", "kitml21"};
}

bool PartitionMap::has_part(const std::string& name) const {
    return std::any_of(parts.begin(), parts.end(),
                       [&](const auto& p) { return p.first == name; });
}

const std::vector<int>& PartitionMap::joints(const std::string& name) const {
    for (const auto& [part, js] : parts) {
        if (part == name) {
            return js;
        }
    }
    throw LookupError("unknown part '" + name + "'");
}

int PartitionMap::end_joint_of(const std::string& name) const {
    auto it = end_joint.find(name);
    if (it == end_joint.end()) {
        throw LookupError("no end joint defined for part '" + name + "'");
    }
    return it->second;
}

std::string PartitionMap::pair_key(const std::string& a, const std::string& b) {
    return a < b ? a + "|" + b : b + "|" + a;
}

std::vector<std::pair<std::string, std::string>> PartitionMap::pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            const std::string& a = parts[i].first;
            const std::string& b = parts[j].first;
            out.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void PartitionMap::validate(int joint_count) const {
    if (parts.empty()) {
        throw ValidationError("partition has no parts");
    }
    std::set<int> used;
    for (const auto& [name, js] : parts) {
        if (js.empty()) {
            throw ValidationError("part '" + name + "' has no joints");
        }
        for (int j : js) {
            if (j < 0 || j >= joint_count) {
                throw ValidationError("part '" + name + "' joint index " +
                                      std::to_string(j) + " out of range");
            }
            if (!used.insert(j).second) {
                throw ValidationError("joint index " + std::to_string(j) +
                                      " assigned to more than one part");
            }
        }
    }
    for (const auto& [name, end] : end_joint) {
        const auto& js = joints(name); // throws on unknown part
        if (std::find(js.begin(), js.end(), end) == js.end()) {
            throw ValidationError("end joint of part '" + name +
                                  "' is not inside the part");
        }
    }
    for (const auto& name : angle_parts) {
        if (!has_part(name)) {
            throw ValidationError("angle part '" + name + "' is not a part");
        }
        end_joint_of(name); // angle parts need an end joint
    }
    if (torso_origin < 0 || torso_origin >= joint_count ||
        torso_tip < 0 || torso_tip >= joint_count) {
        throw ValidationError("torso joint indices out of range");
    }
    if (torso_origin == torso_tip) {
        throw ValidationError("torso origin equals torso tip");
    }
}

PartitionMap default_partition(const std::string& skeleton_id) {
    const SkeletonSpec& spec = skeleton(skeleton_id);
    PartitionMap map;
    map.torso_origin = spec.torso_origin;
    map.torso_tip = spec.torso_tip;
    if (skeleton_id == "humanml3d22") {
        map.parts = {
            {"left_arm", {13, 16, 18, 20}},
            {"right_arm", {14, 17, 19, 21}},
            {"left_leg", {1, 4, 7, 10}},
            {"right_leg", {2, 5, 8, 11}},
            {"backbone", {0, 3, 6, 9, 12, 15}},
        };
        map.end_joint = {{"left_arm", 20}, {"right_arm", 21},
                         {"left_leg", 10}, {"right_leg", 11}};
    } else { // kitml21
        map.parts = {
            {"left_arm", {5, 6, 7}},
            {"right_arm", {8, 9, 10}},
            {"left_leg", {11, 12, 13, 14, 15}},
            {"right_leg", {16, 17, 18, 19, 20}},
            {"backbone", {0, 1, 2, 3, 4}},
        };
        map.end_joint = {{"left_arm", 7}, {"right_arm", 10},
                         {"left_leg", 15}, {"right_leg", 20}};
    }
    // Backbone excluded: its direction is near-parallel to the torso axis.
    map.angle_parts = {"left_arm", "right_arm", "left_leg", "right_leg"};
    map.validate(spec.joint_count());
    return map;
}

PartitionMap coarse_partition(const std::string& skeleton_id) {
    const PartitionMap five = default_partition(skeleton_id);
    auto merge = [&](const std::string& a, const std::string& b) {
        std::vector<int> js = five.joints(a);
        const auto& jb = five.joints(b);
        js.insert(js.end(), jb.begin(), jb.end());
        std::sort(js.begin(), js.end());
        return js;
    };
    PartitionMap map;
    map.torso_origin = five.torso_origin;
    map.torso_tip = five.torso_tip;
    map.parts = {
        {"arms", merge("left_arm", "right_arm")},
        {"legs", merge("left_leg", "right_leg")},
    };
    map.end_joint = {{"arms", five.end_joint_of("right_arm")},
                     {"legs", five.end_joint_of("right_leg")}};
    map.validate(skeleton(skeleton_id).joint_count());
    return map;
}

void MotionSequence::validate() const {
    if (frame_count < 2) {
        throw ValidationError("motion needs at least 2 frames, got " +
                              std::to_string(frame_count));
    }
    if (joint_count < 1) {
        throw ValidationError("motion needs at least 1 joint");
    }
    // Joint count is checked against the declared skeleton only when the id
    // is registered; custom skeletons carry their own joint count.
    if (const SkeletonSpec* spec = find_skeleton(skeleton_id)) {
        if (joint_count != spec->joint_count()) {
            throw ValidationError(
                "joint count " + std::to_string(joint_count) +
                " does not match skeleton '" + skeleton_id + "' (" +
                std::to_string(spec->joint_count()) + " joints)");
        }
    }
    const std::size_t expected =
        static_cast<std::size_t>(frame_count) * joint_count * 3;
    if (positions.size() != expected) {
        throw ValidationError("position buffer size mismatch");
    }
    for (double v : positions) {
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite coordinate in motion data");
        }
    }
}

MotionSequence make_motion_sequence(std::string skeleton_id, double fps,
                                    int frames, int joints,
                                    std::vector<double> positions) {
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw ValidationError("fps must be a positive finite number");
    }
    MotionSequence seq;
    seq.skeleton_id = std::move(skeleton_id);
    seq.fps = fps;
    seq.frame_count = frames;
    seq.joint_count = joints;
    seq.positions = std::move(positions);
    seq.validate();
    return seq;
}

Eigen::Vector3d part_centroid(const MotionSequence& seq,
                              const PartitionMap& partition,
                              const std::string& part, int t) {
    if (t < 0 || t >= seq.frame_count) {
        throw ValidationError("frame index " + std::to_string(t) +
                              " out of range");
    }
    const auto& js = partition.joints(part);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int j : js) {
        acc += seq.pos(t, j);
    }
    return acc / static_cast<double>(js.size());
}

} // namespace party
