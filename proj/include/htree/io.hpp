#pragma once
#include <htree/core.hpp>
#include <htree/transforms.hpp>
#include <htree/tree.hpp>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Portable little-endian file formats. Every class id on disk is 1-based;
// pads are stored as -1. Scores are float32 and labels int64.
//
//   HTSB  score batch       u32 |b|, u32 |c|, f32[|b|*|c|]
//   HTLB  label batch       u32 |b|, i64[|b|]
//   HTPS  partitioned       u32 |b|, u32 |l|, u32 |c|, u8 mask mode, f32 mask payload,
//                           f32[|b|*|l|*|c|]
//   HTPL  path labels       u32 |b|, u32 |l|, i64[|b|*|l|]
//   HTFT  flat training     u32 N, u32 |c|, u8 mask mode, f32 mask payload, f32[N*|c|],
//                           i64[N] labels, (u32 b, u32 l)[N] origin (1-based)

namespace htree::io {

using bytes = std::vector<std::uint8_t>;

bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

TreeEncoding load_encoding(const std::filesystem::path& path, bool check = true);
void save_encoding(const std::filesystem::path& path, const TreeEncoding& enc);

bytes serialize_scores(const ScoreBatch<float>& scores);
ScoreBatch<float> deserialize_scores(std::span<const std::uint8_t> data);

/// Largest |b|*|c| accepted from CSV input.
inline constexpr std::uint64_t csv_score_limit = 1'000'000;

/// One sample per line, comma separated.
ScoreBatch<float> parse_scores_csv(std::string_view text);

bytes serialize_labels(const label_vector_type& labels);
label_vector_type deserialize_labels(std::span<const std::uint8_t> data);

/// 1-based labels separated by commas, whitespace or newlines.
label_vector_type parse_labels_csv(std::string_view text);

/// Binary when the file starts with the format magic, CSV otherwise.
ScoreBatch<float> load_scores(const std::filesystem::path& path);
label_vector_type load_labels(const std::filesystem::path& path);

bytes serialize_partitioned(const PartitionedScores<float>& parts);
PartitionedScores<float> deserialize_partitioned(std::span<const std::uint8_t> data);

bytes serialize_path_labels(const path_label_matrix_type& paths);
path_label_matrix_type deserialize_path_labels(std::span<const std::uint8_t> data);

bytes serialize_flat(const FlatTrainingSet<float>& flat);
FlatTrainingSet<float> deserialize_flat(std::span<const std::uint8_t> data);

} // namespace htree::io
