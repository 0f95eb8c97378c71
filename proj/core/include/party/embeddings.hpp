#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace party {

struct EmbeddingRecord {
    std::string id;
    std::vector<double> vector;      // generic feature vector
    std::vector<double> text_vec;    // optional paired text embedding
    std::vector<double> motion_vec;  // optional paired motion embedding
    std::string group_key;           // optional per-text grouping
};

/// Records are kept sorted by id so seeded sampling is independent of the
/// order they arrived in.
struct EmbeddingSet {
    std::vector<EmbeddingRecord> records;
    int dim = 0; // shared dimension of every vector field present

    std::size_t size() const { return records.size(); }
    bool has_pairs() const;   // every record carries text_vec and motion_vec
    bool has_groups() const;  // every record carries group_key

    /// The feature payload used by set-level metrics: `vector` when present,
    /// otherwise `motion_vec`.
    const std::vector<double>& primary(std::size_t i) const;

    void validate() const;
};

/// JSON-lines, one record per line:
/// {"id": "...", "vector": [...], "text_vec": [...], "motion_vec": [...],
///  "group_key": "..."}  (all fields but id optional)
EmbeddingSet parse_embeddings_jsonl(std::string_view text);
EmbeddingSet load_embeddings_file(const std::filesystem::path& path);
std::string embeddings_to_jsonl(const EmbeddingSet& set);

} // namespace party
