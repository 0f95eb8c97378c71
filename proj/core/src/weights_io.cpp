#include "party/weights_io.hpp"

#include "party/errors.hpp"
#include "party/motion_io.hpp" // read_file
#include "party/rng.hpp"

#include <nlohmann/json.hpp>

namespace party {

using nlohmann::json;

namespace {

json parse_kind(std::string_view text, const std::string& expected) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("weights: malformed JSON at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("kind", std::string()) != expected) {
        throw ValidationError("weights: expected kind '" + expected + "'");
    }
    return doc;
}

Eigen::MatrixXd read_matrix(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty() || !v[0].is_array()) {
        throw ValidationError("weights: '" + what +
                              "' must be an array of rows");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(v[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!v[static_cast<std::size_t>(r)].is_array() ||
            static_cast<Eigen::Index>(v[static_cast<std::size_t>(r)].size()) != cols) {
            throw ValidationError("weights: ragged rows in '" + what + "'");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = v[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                          .get<double>();
        }
    }
    return m;
}

Eigen::VectorXd read_vector(const json& v, const std::string& what) {
    if (!v.is_array()) {
        throw ValidationError("weights: '" + what + "' must be an array");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

} // namespace

DenseStack parse_dense_stack(std::string_view text) {
    const json doc = parse_kind(text, "dense_stack");
    if (!doc.contains("layers") || !doc["layers"].is_array()) {
        throw ValidationError("weights: dense_stack needs a 'layers' array");
    }
    DenseStack stack;
    for (const auto& layer : doc["layers"]) {
        DenseLayer l;
        l.weight = read_matrix(layer.at("w"), "w");
        l.bias = read_vector(layer.at("b"), "b");
        l.act = activation_from_string(layer.value("act", std::string("none")));
        stack.layers.push_back(std::move(l));
    }
    stack.validate();
    return stack;
}

Codebook parse_codebook(std::string_view text) {
    const json doc = parse_kind(text, "codebook");
    Codebook cb;
    cb.entries = read_matrix(doc.at("entries"), "entries");
    cb.validate();
    return cb;
}

AttentionParams parse_attention_params(std::string_view text) {
    const json doc = parse_kind(text, "attention");
    AttentionParams p;
    p.heads = doc.at("heads").get<int>();
    p.head_dim = doc.at("head_dim").get<int>();
    p.wq = read_matrix(doc.at("wq"), "wq");
    p.wk = read_matrix(doc.at("wk"), "wk");
    p.wv = read_matrix(doc.at("wv"), "wv");
    p.validate();
    return p;
}

std::string dense_stack_to_json(const DenseStack& stack) {
    json layers = json::array();
    for (const auto& l : stack.layers) {
        json layer;
        layer["w"] = matrix_to_json(l.weight);
        layer["b"] = vector_to_json(l.bias);
        layer["act"] = activation_name(l.act);
        layers.push_back(std::move(layer));
    }
    json doc;
    doc["kind"] = "dense_stack";
    doc["layers"] = std::move(layers);
    return doc.dump();
}

std::string codebook_to_json(const Codebook& codebook) {
    json doc;
    doc["kind"] = "codebook";
    doc["entries"] = matrix_to_json(codebook.entries);
    return doc.dump();
}

std::string attention_params_to_json(const AttentionParams& params) {
    json doc;
    doc["kind"] = "attention";
    doc["heads"] = params.heads;
    doc["head_dim"] = params.head_dim;
    doc["wq"] = matrix_to_json(params.wq);
    doc["wk"] = matrix_to_json(params.wk);
    doc["wv"] = matrix_to_json(params.wv);
    return doc.dump();
}

DenseStack load_dense_stack(const std::filesystem::path& path) {
    return parse_dense_stack(read_file(path));
}

Codebook load_codebook(const std::filesystem::path& path) {
    return parse_codebook(read_file(path));
}

AttentionParams load_attention_params(const std::filesystem::path& path) {
    return parse_attention_params(read_file(path));
}

Eigen::MatrixXd seeded_matrix(int rows, int cols, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(-0.1, 0.1);
        }
    }
    return m;
}

DenseStack seeded_dense_stack(const std::vector<int>& dims, Activation act,
                              std::uint64_t seed) {
    if (dims.size() < 2) {
        throw ValidationError("seeded_dense_stack: need input and output dims");
    }
    SplitMix64 rng(seed);
    DenseStack stack;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer l;
        l.weight.resize(dims[i + 1], dims[i]);
        for (int r = 0; r < dims[i + 1]; ++r) {
            for (int c = 0; c < dims[i]; ++c) {
                l.weight(r, c) = rng.uniform(-0.1, 0.1);
            }
        }
        l.bias.resize(dims[i + 1]);
        for (int r = 0; r < dims[i + 1]; ++r) {
            l.bias[r] = rng.uniform(-0.1, 0.1);
        }
        // hidden layers take the activation, the final layer stays linear
        l.act = (i + 2 < dims.size()) ? act : Activation::none;
        stack.layers.push_back(std::move(l));
    }
    stack.validate();
    return stack;
}

Codebook seeded_codebook(int entries, int dim, std::uint64_t seed) {
    Codebook cb;
    cb.entries = seeded_matrix(entries, dim, seed);
    cb.validate();
    return cb;
}

AttentionParams seeded_attention_params(int heads, int head_dim, int query_in,
                                        int kv_in, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int proj = heads * head_dim;
    auto fill = [&](Eigen::MatrixXd& m, int rows, int cols) {
        m.resize(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                m(r, c) = rng.uniform(-0.1, 0.1);
            }
        }
    };
    AttentionParams p;
    p.heads = heads;
    p.head_dim = head_dim;
    fill(p.wq, proj, query_in);
    fill(p.wk, proj, kv_in);
    fill(p.wv, proj, kv_in);
    p.validate();
    return p;
}

} // namespace party
