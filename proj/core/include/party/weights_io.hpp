#pragma once

#include "party/kernels.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace party {

/// Weight files carry a "kind" discriminator:
///   {"kind":"dense_stack","layers":[{"w":[[...]],"b":[...],"act":"relu"}]}
///   {"kind":"codebook","entries":[[...]]}
///   {"kind":"attention","heads":H,"head_dim":D,"wq":[[...]],"wk":...,"wv":...}
DenseStack parse_dense_stack(std::string_view text);
Codebook parse_codebook(std::string_view text);
AttentionParams parse_attention_params(std::string_view text);

std::string dense_stack_to_json(const DenseStack& stack);
std::string codebook_to_json(const Codebook& codebook);
std::string attention_params_to_json(const AttentionParams& params);

DenseStack load_dense_stack(const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);
AttentionParams load_attention_params(const std::filesystem::path& path);

/// Seeded uniform(-0.1, 0.1) initializers. The fill sequence is fixed so any
/// implementation reproduces identical weights: one splitmix64 stream per
/// call, matrices filled row-major, each layer's weight before its bias.
Eigen::MatrixXd seeded_matrix(int rows, int cols, std::uint64_t seed);
DenseStack seeded_dense_stack(const std::vector<int>& dims, Activation act,
                              std::uint64_t seed);
Codebook seeded_codebook(int entries, int dim, std::uint64_t seed);
AttentionParams seeded_attention_params(int heads, int head_dim, int query_in,
                                        int kv_in, std::uint64_t seed);

} // namespace party
