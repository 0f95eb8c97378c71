#include "party/embeddings.hpp"

#include "party/errors.hpp"
#include "party/motion_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace party {

using nlohmann::json;

bool EmbeddingSet::has_pairs() const {
    return !records.empty() &&
           std::all_of(records.begin(), records.end(), [](const auto& r) {
               return !r.text_vec.empty() && !r.motion_vec.empty();
           });
}

bool EmbeddingSet::has_groups() const {
    return !records.empty() &&
           std::all_of(records.begin(), records.end(),
                       [](const auto& r) { return !r.group_key.empty(); });
}

const std::vector<double>& EmbeddingSet::primary(std::size_t i) const {
    const EmbeddingRecord& r = records[i];
    if (!r.vector.empty()) {
        return r.vector;
    }
    if (!r.motion_vec.empty()) {
        return r.motion_vec;
    }
    throw ValidationError("embedding record '" + r.id +
                          "' has neither 'vector' nor 'motion_vec'");
}

void EmbeddingSet::validate() const {
    if (records.empty()) {
        throw ValidationError("embedding set is empty");
    }
    std::set<std::string> ids;
    int d = 0;
    auto check_vec = [&](const std::vector<double>& v, const std::string& id,
                         const char* field) {
        if (v.empty()) return;
        if (d == 0) d = static_cast<int>(v.size());
        if (static_cast<int>(v.size()) != d) {
            throw ValidationError("embedding record '" + id + "' field " +
                                  field + " has dimension " +
                                  std::to_string(v.size()) + ", expected " +
                                  std::to_string(d));
        }
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw ValidationError("embedding record '" + id +
                                      "' has a non-finite value");
            }
        }
    };
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) {
            throw ValidationError("duplicate embedding id '" + r.id + "'");
        }
        if (r.vector.empty() && r.text_vec.empty() && r.motion_vec.empty()) {
            throw ValidationError("embedding record '" + r.id +
                                  "' carries no vectors");
        }
        check_vec(r.vector, r.id, "vector");
        check_vec(r.text_vec, r.id, "text_vec");
        check_vec(r.motion_vec, r.id, "motion_vec");
    }
}

namespace {

std::vector<double> read_vector(const json& v, int line_no, const char* field) {
    if (!v.is_array()) {
        throw ValidationError("embeddings line " + std::to_string(line_no) +
                              ": '" + field + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) {
            throw ValidationError("embeddings line " + std::to_string(line_no) +
                                  ": '" + field + "' has a non-numeric entry");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

EmbeddingSet parse_embeddings_jsonl(std::string_view text) {
    EmbeddingSet set;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("embeddings line " + std::to_string(line_no) +
                             ": malformed JSON at byte " +
                             std::to_string(e.byte) + ": " + e.what());
        } catch (const json::exception& e) {
            throw ParseError("embeddings line " + std::to_string(line_no) +
                             ": " + e.what());
        }
        if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string()) {
            throw ValidationError("embeddings line " + std::to_string(line_no) +
                                  ": missing string field 'id'");
        }
        EmbeddingRecord rec;
        rec.id = doc["id"].get<std::string>();
        if (doc.contains("vector")) {
            rec.vector = read_vector(doc["vector"], line_no, "vector");
        }
        if (doc.contains("text_vec")) {
            rec.text_vec = read_vector(doc["text_vec"], line_no, "text_vec");
        }
        if (doc.contains("motion_vec")) {
            rec.motion_vec = read_vector(doc["motion_vec"], line_no, "motion_vec");
        }
        if (doc.contains("group_key")) {
            if (!doc["group_key"].is_string()) {
                throw ValidationError("embeddings line " +
                                      std::to_string(line_no) +
                                      ": 'group_key' must be a string");
            }
            rec.group_key = doc["group_key"].get<std::string>();
        }
        set.records.push_back(std::move(rec));
    }
    std::sort(set.records.begin(), set.records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    set.validate();
    for (const auto& r : set.records) {
        if (!r.vector.empty()) { set.dim = static_cast<int>(r.vector.size()); break; }
        if (!r.text_vec.empty()) { set.dim = static_cast<int>(r.text_vec.size()); break; }
        if (!r.motion_vec.empty()) { set.dim = static_cast<int>(r.motion_vec.size()); break; }
    }
    return set;
}

EmbeddingSet load_embeddings_file(const std::filesystem::path& path) {
    return parse_embeddings_jsonl(read_file(path));
}

std::string embeddings_to_jsonl(const EmbeddingSet& set) {
    std::string out;
    for (const auto& r : set.records) {
        json doc;
        doc["id"] = r.id;
        if (!r.vector.empty()) doc["vector"] = r.vector;
        if (!r.text_vec.empty()) doc["text_vec"] = r.text_vec;
        if (!r.motion_vec.empty()) doc["motion_vec"] = r.motion_vec;
        if (!r.group_key.empty()) doc["group_key"] = r.group_key;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

} // namespace party
