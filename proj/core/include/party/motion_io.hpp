#pragma once

#include "party/motion.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace party {

enum class MotionFormat { json, csv };

MotionSequence parse_motion(std::string_view text, MotionFormat format);
MotionSequence parse_motion_json(std::string_view text);
MotionSequence parse_motion_csv(std::string_view text);

/// Dispatches on extension (.json / .csv).
MotionSequence load_motion_file(const std::filesystem::path& path);

/// Round-trips bit-identically: parse(serialize(seq)) == seq.
std::string motion_to_json(const MotionSequence& seq);
/// Header `frame,j0x,j0y,j0z,...`; 17 significant digits per coordinate.
std::string motion_to_csv(const MotionSequence& seq);

/// Partition override file:
/// {"parts": {"name": [indices]}, "end_joint": {...},
///  "angle_parts": [...], "torso": {"origin": i, "tip": j}}
/// Missing end_joint/angle_parts default to empty; missing torso falls back
/// to the skeleton's torso definition.
PartitionMap parse_partition_override(std::string_view text,
                                      const std::string& skeleton_id,
                                      int joint_count);
PartitionMap load_partition_file(const std::filesystem::path& path,
                                 const std::string& skeleton_id,
                                 int joint_count);

std::string read_file(const std::filesystem::path& path);   // throws IoError
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace party
