#include "motifrep/core/motif_io.h"

#include <fstream>

namespace motifrep {

using nlohmann::json;

json token_rows_to_json(const TokenMatrix& tokens) {
  json rows = json::array();
  for (const auto& row : tokens.rows) rows.push_back(row);
  return rows;
}

TokenMatrix token_matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  if (!j.contains("rows")) throw SchemaError(path + ".rows", "missing");
  const json& rows = j.at("rows");
  if (!rows.is_array()) throw SchemaError(path + ".rows", "expected an array");
  if (rows.size() > static_cast<std::size_t>(kMaxRows)) throw SchemaError(path + ".rows", "more than 120 rows");

  TokenMatrix t;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string rp = path + ".rows[" + std::to_string(r) + "]";
    if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(kNumAttributes)) {
      throw SchemaError(rp, "expected an array of 7 integers");
    }
    for (std::size_t k = 0; k < static_cast<std::size_t>(kNumAttributes); ++k) {
      if (!rows[r][k].is_number_integer()) throw SchemaError(rp + "[" + std::to_string(k) + "]", "expected an integer");
      t.rows[r][k] = rows[r][k].get<int>();
    }
  }
  if (j.contains("valid_len")) {
    if (!j.at("valid_len").is_number_integer()) throw SchemaError(path + ".valid_len", "expected an integer");
    t.valid_len = j.at("valid_len").get<int>();
  } else {
    int n = 0;
    while (n < kMaxRows && t.at(n, Attribute::Type) != kPad) ++n;
    t.valid_len = n;
  }
  if (t.valid_len < 0 || t.valid_len > static_cast<int>(rows.size())) {
    throw SchemaError(path + ".valid_len", "must lie in [0, number of rows]");
  }
  return t;
}

json motif_record_to_json(const MotifRecord& record) {
  return json{{"song_id", record.song_id},
              {"bar_index", record.bar_index},
              {"valid_len", record.tokens.valid_len},
              {"rows", token_rows_to_json(record.tokens)}};
}

MotifRecord motif_record_from_json(const json& j, const std::string& path) {
  MotifRecord rec;
  rec.tokens = token_matrix_from_json(j, path);
  if (j.contains("song_id")) {
    if (!j.at("song_id").is_string()) throw SchemaError(path + ".song_id", "expected a string");
    rec.song_id = j.at("song_id").get<std::string>();
  }
  if (j.contains("bar_index")) {
    if (!j.at("bar_index").is_number_integer()) throw SchemaError(path + ".bar_index", "expected an integer");
    rec.bar_index = j.at("bar_index").get<int>();
  }
  return rec;
}

void write_motifs_jsonl(const std::vector<MotifRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << motif_record_to_json(r).dump() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<MotifRecord> read_motifs_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<MotifRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno), e.what());
    }
    out.push_back(motif_record_from_json(j, path.string() + ":" + std::to_string(lineno)));
  }
  return out;
}

}  // namespace motifrep
