#include "party/motion.hpp"

#include "party/errors.hpp"
#include "party/rng.hpp"
#include "synthetic.hpp"

#include "doctest.h"

#include <algorithm>
#include <set>

using namespace party;

TEST_CASE("skeleton registry") {
    const SkeletonSpec& hm = skeleton("humanml3d22");
    CHECK(hm.joint_count() == 22);
    CHECK(hm.joint_names[0] == "pelvis");
    CHECK(hm.joint_names[21] == "right_wrist");
    CHECK(hm.torso_origin == 0);
    CHECK(hm.torso_tip == 12);

    const SkeletonSpec& kit = skeleton("kitml21");
    CHECK(kit.joint_count() == 21);

    CHECK(find_skeleton("nope") == nullptr);
    CHECK_THROWS_AS(skeleton("nope"), LookupError);
}

TEST_CASE("default partition humanml3d22") {
    const PartitionMap map = default_partition("humanml3d22");
    CHECK(map.parts.size() == 5);
    CHECK(map.pairs().size() == 10); // C(5,2)

    // end joints sit at the distal limb joints
    const SkeletonSpec& spec = skeleton("humanml3d22");
    CHECK(map.end_joint_of("left_arm") == spec.joint_index("left_wrist"));
    CHECK(map.end_joint_of("right_arm") == spec.joint_index("right_wrist"));
    CHECK(map.end_joint_of("left_leg") == spec.joint_index("left_foot"));
    CHECK(map.end_joint_of("right_leg") == spec.joint_index("right_foot"));

    // four limbs carry angles, the backbone does not
    CHECK(map.angle_parts.size() == 4);
    CHECK(std::find(map.angle_parts.begin(), map.angle_parts.end(),
                    "backbone") == map.angle_parts.end());

    // joint sets pairwise disjoint
    std::set<int> seen;
    std::size_t total = 0;
    for (const auto& [name, js] : map.parts) {
        seen.insert(js.begin(), js.end());
        total += js.size();
    }
    CHECK(seen.size() == total);
}

TEST_CASE("default partition kitml21") {
    const PartitionMap map = default_partition("kitml21");
    CHECK(map.parts.size() == 5);
    std::set<int> seen;
    for (const auto& [name, js] : map.parts) {
        for (int j : js) {
            CHECK(j >= 0);
            CHECK(j < 21);
            CHECK(seen.insert(j).second);
        }
    }
    CHECK_THROWS_AS(default_partition("unknown"), LookupError);
}

TEST_CASE("coarse arms/legs grouping") {
    const PartitionMap coarse = coarse_partition("humanml3d22");
    CHECK(coarse.parts.size() == 2);
    CHECK(coarse.joints("arms").size() == 8);
    CHECK(coarse.joints("legs").size() == 8);
}

TEST_CASE("pair keys are alphabetical") {
    CHECK(PartitionMap::pair_key("left_arm", "backbone") == "backbone|left_arm");
    CHECK(PartitionMap::pair_key("backbone", "left_arm") == "backbone|left_arm");
    const auto pairs = default_partition("humanml3d22").pairs();
    CHECK(std::is_sorted(pairs.begin(), pairs.end()));
    for (const auto& [a, b] : pairs) {
        CHECK(a < b);
    }
}

TEST_CASE("partition validation rejects bad maps") {
    PartitionMap map = default_partition("humanml3d22");
    SUBCASE("overlapping joints") {
        map.parts[0].second.push_back(map.parts[1].second[0]);
        CHECK_THROWS_AS(map.validate(22), ValidationError);
    }
    SUBCASE("end joint outside its part") {
        map.end_joint["left_arm"] = 0; // pelvis
        CHECK_THROWS_AS(map.validate(22), ValidationError);
    }
    SUBCASE("angle part without a part") {
        map.angle_parts.push_back("tail");
        CHECK_THROWS_AS(map.validate(22), ValidationError);
    }
    SUBCASE("torso degenerate") {
        map.torso_tip = map.torso_origin;
        CHECK_THROWS_AS(map.validate(22), ValidationError);
    }
}

TEST_CASE("motion sequence validation") {
    CHECK_THROWS_AS(
        make_motion_sequence("humanml3d22", 20.0, 1, 22,
                             std::vector<double>(22 * 3, 0.0)),
        ValidationError); // T < 2
    CHECK_THROWS_AS(
        make_motion_sequence("humanml3d22", 20.0, 2, 3,
                             std::vector<double>(2 * 3 * 3, 0.0)),
        ValidationError); // joint count mismatch vs registered skeleton
    CHECK_THROWS_AS(
        make_motion_sequence("custom", 0.0, 2, 1,
                             std::vector<double>(6, 0.0)),
        ValidationError); // fps must be positive
    // custom skeleton ids carry their own joint count
    const MotionSequence seq = make_motion_sequence(
        "custom", 30.0, 2, 1, {0, 0, 0, 1, 0, 0});
    CHECK(seq.frame_count == 2);
    CHECK(seq.joint_count == 1);
}

TEST_CASE("part_centroid basics") {
    // single-joint part is the identity
    MotionSequence seq = make_motion_sequence(
        "custom3", 20.0, 2, 3,
        {3, 1, 2, 0, 0, 0, 2, 0, 0, /* frame 1 */ 0, 0, 0, 1, 1, 1, 2, 2, 2});
    PartitionMap map;
    map.parts = {{"solo", {0}}, {"duo", {1, 2}}};
    map.torso_origin = 0;
    map.torso_tip = 1;

    CHECK(part_centroid(seq, map, "solo", 0) == Eigen::Vector3d(3, 1, 2));
    // two joints at (0,0,0) and (2,0,0) average to (1,0,0)
    CHECK(part_centroid(seq, map, "duo", 0) == Eigen::Vector3d(1, 0, 0));
    CHECK_THROWS_AS(part_centroid(seq, map, "nope", 0), LookupError);
    CHECK_THROWS_AS(part_centroid(seq, map, "solo", 5), ValidationError);
}

TEST_CASE("part_centroid three-point average") {
    // three joints at (0,0,0), (1,1,1), (2,2,2) -> (1,1,1)
    MotionSequence seq = make_motion_sequence(
        "custom3", 20.0, 2, 3,
        {0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 0, 0, 1, 1, 1, 2, 2, 2});
    PartitionMap map;
    map.parts = {{"all", {0, 1, 2}}};
    map.torso_origin = 0;
    map.torso_tip = 1;
    const Eigen::Vector3d c = part_centroid(seq, map, "all", 1);
    CHECK(c.isApprox(Eigen::Vector3d(1, 1, 1), 1e-15));
}

TEST_CASE("part_centroid invariant under joint permutation") {
    const MotionSequence seq = party::testing::jittered_pose_motion(7, 4);
    PartitionMap a;
    a.parts = {{"p", {13, 16, 18, 20}}};
    a.torso_origin = 0;
    a.torso_tip = 12;
    PartitionMap b;
    b.parts = {{"p", {20, 13, 18, 16}}};
    b.torso_origin = 0;
    b.torso_tip = 12;
    for (int t = 0; t < seq.frame_count; ++t) {
        const Eigen::Vector3d ca = part_centroid(seq, a, "p", t);
        const Eigen::Vector3d cb = part_centroid(seq, b, "p", t);
        CHECK(ca.isApprox(cb, 1e-15));
    }
}

TEST_CASE("part_centroid commutes with rigid transforms") {
    const MotionSequence seq = party::testing::jittered_pose_motion(11, 6);
    const Eigen::Matrix3d rot = party::testing::rotation_xyz(0.9, -0.2, 0.3);
    const Eigen::Vector3d shift(0.4, -1.2, 2.5);
    const MotionSequence moved =
        party::testing::rigid_transformed(seq, rot, shift);
    const PartitionMap map = default_partition("humanml3d22");
    for (const auto& [name, js] : map.parts) {
        for (int t = 0; t < seq.frame_count; ++t) {
            const Eigen::Vector3d expect =
                rot * part_centroid(seq, map, name, t) + shift;
            const Eigen::Vector3d got = part_centroid(moved, map, name, t);
            CHECK((expect - got).norm() <=
                  1e-9 * std::max(1.0, expect.norm()));
        }
    }
}
