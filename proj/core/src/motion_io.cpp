#include "party/motion_io.hpp"

#include "party/errors.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace party {

using nlohmann::json;

namespace {

double finite_number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        throw ValidationError(where + ": expected a number, got " +
                              std::string(v.type_name()));
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ValidationError(where + ": non-finite coordinate");
    }
    return d;
}

json parse_json_text(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is the offset the parser stopped at
        throw ParseError(what + ": malformed JSON at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    } catch (const json::exception& e) {
        // overflowing literals and similar unrepresentable values
        throw ParseError(what + ": " + e.what());
    }
}

} // namespace

MotionSequence parse_motion_json(std::string_view text) {
    const json doc = parse_json_text(text, "motion");
    if (!doc.is_object()) {
        throw ParseError("motion: top-level value must be an object");
    }
    if (!doc.contains("skeleton") || !doc["skeleton"].is_string()) {
        throw ValidationError("motion: missing string field 'skeleton'");
    }
    if (!doc.contains("fps") || !doc["fps"].is_number()) {
        throw ValidationError("motion: missing numeric field 'fps'");
    }
    if (!doc.contains("frames") || !doc["frames"].is_array()) {
        throw ValidationError("motion: missing array field 'frames'");
    }
    const auto& frames = doc["frames"];
    const int t_count = static_cast<int>(frames.size());
    if (t_count == 0) {
        throw ValidationError("motion: 'frames' is empty");
    }
    const int j_count = frames[0].is_array()
                            ? static_cast<int>(frames[0].size())
                            : 0;
    std::vector<double> positions;
    positions.reserve(static_cast<std::size_t>(t_count) * j_count * 3);
    for (int t = 0; t < t_count; ++t) {
        const auto& frame = frames[t];
        if (!frame.is_array() || static_cast<int>(frame.size()) != j_count) {
            throw ValidationError("motion: frame " + std::to_string(t) +
                                  " has inconsistent joint count");
        }
        for (int j = 0; j < j_count; ++j) {
            const auto& p = frame[j];
            if (!p.is_array() || p.size() != 3) {
                throw ValidationError("motion: frame " + std::to_string(t) +
                                      " joint " + std::to_string(j) +
                                      " is not an [x,y,z] triple");
            }
            const std::string where = "motion: frame " + std::to_string(t) +
                                      " joint " + std::to_string(j);
            for (int a = 0; a < 3; ++a) {
                positions.push_back(finite_number(p[a], where));
            }
        }
    }
    return make_motion_sequence(doc["skeleton"].get<std::string>(),
                                doc["fps"].get<double>(), t_count, j_count,
                                std::move(positions));
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

double parse_csv_number(std::string_view field, int line_no, int col) {
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("motion csv: line " + std::to_string(line_no) +
                         " column " + std::to_string(col) +
                         ": not a number: '" + std::string(field) + "'");
    }
    return value;
}

} // namespace

MotionSequence parse_motion_csv(std::string_view text) {
    // Leading metadata comments carry skeleton/fps:
    //   # skeleton: humanml3d22
    //   # fps: 20
    std::string skeleton_id;
    double fps = 0.0;
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        if (nl == text.size()) break;
        pos = nl + 1;
    }
    std::size_t idx = 0;
    while (idx < lines.size() && lines[idx].front() == '#') {
        std::string_view line = lines[idx].substr(1);
        const std::size_t colon = line.find(':');
        if (colon != std::string_view::npos) {
            auto trim = [](std::string_view s) {
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
                return s;
            };
            const std::string_view key = trim(line.substr(0, colon));
            const std::string_view val = trim(line.substr(colon + 1));
            if (key == "skeleton") {
                skeleton_id = std::string(val);
            } else if (key == "fps") {
                fps = parse_csv_number(val, static_cast<int>(idx + 1), 1);
            }
        }
        ++idx;
    }
    if (skeleton_id.empty() || fps == 0.0) {
        throw ValidationError(
            "motion csv: missing '# skeleton:' or '# fps:' metadata lines");
    }
    if (idx >= lines.size()) {
        throw ParseError("motion csv: missing header line");
    }
    const auto header = split_csv_line(lines[idx]);
    if (header.empty() || header[0] != "frame" || (header.size() - 1) % 3 != 0) {
        throw ParseError("motion csv: header must be frame,j0x,j0y,j0z,...");
    }
    const int j_count = static_cast<int>((header.size() - 1) / 3);
    if (j_count == 0) {
        throw ParseError("motion csv: header declares no joints");
    }
    ++idx;

    std::vector<double> positions;
    int t_count = 0;
    for (; idx < lines.size(); ++idx, ++t_count) {
        const int line_no = static_cast<int>(idx + 1);
        const auto fields = split_csv_line(lines[idx]);
        if (static_cast<int>(fields.size()) != 1 + j_count * 3) {
            throw ParseError("motion csv: line " + std::to_string(line_no) +
                             ": expected " + std::to_string(1 + j_count * 3) +
                             " fields, got " + std::to_string(fields.size()));
        }
        const double frame_no = parse_csv_number(fields[0], line_no, 1);
        if (frame_no != static_cast<double>(t_count)) {
            throw ParseError("motion csv: line " + std::to_string(line_no) +
                             ": frame index out of order");
        }
        for (std::size_t f = 1; f < fields.size(); ++f) {
            positions.push_back(
                parse_csv_number(fields[f], line_no, static_cast<int>(f + 1)));
        }
    }
    if (t_count == 0) {
        throw ValidationError("motion csv: no data rows");
    }
    return make_motion_sequence(std::move(skeleton_id), fps, t_count, j_count,
                                std::move(positions));
}

MotionSequence parse_motion(std::string_view text, MotionFormat format) {
    return format == MotionFormat::json ? parse_motion_json(text)
                                        : parse_motion_csv(text);
}

MotionSequence load_motion_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (path.extension() == ".csv") {
        return parse_motion_csv(text);
    }
    return parse_motion_json(text);
}

std::string motion_to_json(const MotionSequence& seq) {
    json frames = json::array();
    for (int t = 0; t < seq.frame_count; ++t) {
        json frame = json::array();
        for (int j = 0; j < seq.joint_count; ++j) {
            const Eigen::Vector3d p = seq.pos(t, j);
            frame.push_back(json::array({p.x(), p.y(), p.z()}));
        }
        frames.push_back(std::move(frame));
    }
    json doc;
    doc["skeleton"] = seq.skeleton_id;
    doc["fps"] = seq.fps;
    doc["frames"] = std::move(frames);
    return doc.dump();
}

std::string motion_to_csv(const MotionSequence& seq) {
    std::string out;
    out += "# skeleton: " + seq.skeleton_id + "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", seq.fps);
    out += std::string("# fps: ") + buf + "\n";
    out += "frame";
    for (int j = 0; j < seq.joint_count; ++j) {
        const std::string sj = std::to_string(j);
        out += ",j" + sj + "x,j" + sj + "y,j" + sj + "z";
    }
    out += "\n";
    for (int t = 0; t < seq.frame_count; ++t) {
        out += std::to_string(t);
        for (int j = 0; j < seq.joint_count; ++j) {
            const Eigen::Vector3d p = seq.pos(t, j);
            for (int a = 0; a < 3; ++a) {
                std::snprintf(buf, sizeof buf, ",%.17g", p[a]);
                out += buf;
            }
        }
        out += "\n";
    }
    return out;
}

PartitionMap parse_partition_override(std::string_view text,
                                      const std::string& skeleton_id,
                                      int joint_count) {
    const json doc = parse_json_text(text, "partition");
    if (!doc.is_object() || !doc.contains("parts") || !doc["parts"].is_object()) {
        throw ValidationError("partition: missing object field 'parts'");
    }
    PartitionMap map;
    for (const auto& [name, arr] : doc["parts"].items()) {
        if (!arr.is_array()) {
            throw ValidationError("partition: part '" + name +
                                  "' must be an index array");
        }
        std::vector<int> js;
        for (const auto& v : arr) {
            if (!v.is_number_integer()) {
                throw ValidationError("partition: part '" + name +
                                      "' has a non-integer joint index");
            }
            js.push_back(v.get<int>());
        }
        map.parts.emplace_back(name, std::move(js));
    }
    if (doc.contains("end_joint")) {
        for (const auto& [name, v] : doc["end_joint"].items()) {
            if (!v.is_number_integer()) {
                throw ValidationError("partition: end_joint of '" + name +
                                      "' must be an integer");
            }
            map.end_joint[name] = v.get<int>();
        }
    }
    if (doc.contains("angle_parts")) {
        for (const auto& v : doc["angle_parts"]) {
            if (!v.is_string()) {
                throw ValidationError("partition: angle_parts entries must be strings");
            }
            map.angle_parts.push_back(v.get<std::string>());
        }
    }
    if (doc.contains("torso")) {
        const auto& torso = doc["torso"];
        if (!torso.is_object() || !torso.contains("origin") || !torso.contains("tip")) {
            throw ValidationError("partition: 'torso' needs 'origin' and 'tip'");
        }
        map.torso_origin = torso["origin"].get<int>();
        map.torso_tip = torso["tip"].get<int>();
    } else if (const SkeletonSpec* spec = find_skeleton(skeleton_id)) {
        map.torso_origin = spec->torso_origin;
        map.torso_tip = spec->torso_tip;
    } else {
        throw ValidationError(
            "partition: 'torso' is required for unregistered skeleton '" +
            skeleton_id + "'");
    }
    map.validate(joint_count);
    return map;
}

PartitionMap load_partition_file(const std::filesystem::path& path,
                                 const std::string& skeleton_id,
                                 int joint_count) {
    return parse_partition_override(read_file(path), skeleton_id, joint_count);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure on '" + path.string() + "'");
    }
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("write failure on '" + path.string() + "'");
    }
}

} // namespace party
