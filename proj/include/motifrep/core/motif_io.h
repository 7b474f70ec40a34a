/**
 * @file motif_io.h
 * @brief JSON form of token matrices and the motif JSON Lines dump.
 *
 * Motif schema: {"song_id": str, "bar_index": int, "valid_len": int, "rows": [[7 ints] x 120]}.
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motifrep/core/tokenizer.h"

namespace motifrep {

struct MotifRecord {
  std::string song_id;
  int bar_index = 0;
  TokenMatrix tokens;
};

nlohmann::json token_rows_to_json(const TokenMatrix& tokens);

/// Reads "valid_len" and "rows" from `j`. Fewer than 120 rows are pad-extended.
/// Throws SchemaError naming the field under `path`.
TokenMatrix token_matrix_from_json(const nlohmann::json& j, const std::string& path = "$");

nlohmann::json motif_record_to_json(const MotifRecord& record);
MotifRecord motif_record_from_json(const nlohmann::json& j, const std::string& path = "$");

void write_motifs_jsonl(const std::vector<MotifRecord>& records, const std::filesystem::path& path);
std::vector<MotifRecord> read_motifs_jsonl(const std::filesystem::path& path);

}  // namespace motifrep
