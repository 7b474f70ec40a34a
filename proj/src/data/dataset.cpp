#include "motifrep/data/dataset.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "motifrep/core/rng.h"
#include "motifrep/core/segment.h"
#include "motifrep/error.h"

namespace motifrep {

using nlohmann::json;

namespace {

template <typename F>
void get_field(const json& j, const char* key, F& field) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(field);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("$.") + key, e.what());
  }
}

/// Inverse of RepetitionLabel::detail() for a given type.
RepetitionLabel parse_label(const std::string& type, const std::string& detail, const std::string& path) {
  const auto t = parse_repetition_type(type);
  if (!t || !is_trainable(*t)) throw SchemaError(path + ".label", "unknown repetition type '" + type + "'");
  RepetitionLabel label;
  label.type = *t;
  if (*t == RepetitionType::TrR) {
    const auto colon = detail.find(':');
    if (colon == std::string::npos) throw SchemaError(path + ".detail", "expected kind:offset");
    const std::string kind = detail.substr(0, colon);
    Transposition tr;
    if (kind == "chromatic") {
      tr.kind = TranspositionKind::Chromatic;
    } else if (kind == "diatonic") {
      tr.kind = TranspositionKind::Diatonic;
    } else {
      throw SchemaError(path + ".detail", "unknown transposition kind '" + kind + "'");
    }
    try {
      tr.offset = std::stoi(detail.substr(colon + 1));
    } catch (const std::exception&) {
      throw SchemaError(path + ".detail", "bad transposition offset");
    }
    label.transposition = tr;
  } else if (*t == RepetitionType::SyR) {
    bool found = false;
    for (auto kind : {SymmetryKind::Horizontal, SymmetryKind::Vertical, SymmetryKind::Rotational}) {
      if (to_string(kind) == detail) {
        label.symmetry = kind;
        found = true;
      }
    }
    if (!found) throw SchemaError(path + ".detail", "unknown symmetry kind '" + detail + "'");
  }
  return label;
}

bool same_label(const RepetitionLabel& a, const RepetitionLabel& b) {
  return a.type == b.type && a.transposition == b.transposition && a.symmetry == b.symmetry;
}

}  // namespace

json to_json(const DatasetConfig& c) {
  return json{{"window", c.window}, {"holdout_songs", c.holdout_songs}, {"seed", c.seed}, {"threshold", c.threshold}};
}

DatasetConfig dataset_config_from_json(const json& j) {
  DatasetConfig c;
  get_field(j, "window", c.window);
  get_field(j, "holdout_songs", c.holdout_songs);
  get_field(j, "seed", c.seed);
  get_field(j, "threshold", c.threshold);
  if (c.window < 0) throw SchemaError("$.window", "must be >= 0");
  if (c.holdout_songs < 0) throw SchemaError("$.holdout_songs", "must be >= 0");
  if (c.threshold <= 0 || c.threshold > 1) throw SchemaError("$.threshold", "must lie in (0, 1]");
  return c;
}

json to_json(const BuildReport& r) {
  return json{{"pairs", r.pairs},
              {"kept", r.kept},
              {"ambiguous", r.ambiguous},
              {"unrelated", r.unrelated},
              {"ambiguous_rate", r.ambiguous_rate()}};
}

std::vector<MotifRecord> ingest(const NoteSequence& seq, const std::string& song_id, Diagnostics* diag) {
  const NoteSequence q = quantize(seq);
  const double bpm = q.initial_bpm();
  std::vector<MotifRecord> out;
  for (const Motif& m : segment_bars(q)) {
    Diagnostics local;
    MotifRecord rec{song_id, m.bar_index, tokenize(m, bpm, &local)};
    if (diag) {
      for (const auto& w : local.warnings()) diag->warn(song_id + " bar " + std::to_string(m.bar_index) + ": " + w);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

RepetitionLabel classify_tokens(const TokenMatrix& a, const TokenMatrix& b, const Key& key, double threshold) {
  const Motif ma = detokenize(a);
  const Motif mb = detokenize(b);
  if (ma.notes.empty() || mb.notes.empty()) return RepetitionLabel{};
  return classify(ma, mb, key, threshold);
}

Key song_key(const std::vector<const MotifRecord*>& motifs) {
  std::vector<Note> notes;
  for (const auto* rec : motifs) {
    const Motif m = detokenize(rec->tokens, rec->bar_index);
    notes.insert(notes.end(), m.notes.begin(), m.notes.end());
  }
  return infer_key(notes);
}

std::vector<RepetitionSample> build_dataset(const std::vector<MotifRecord>& records, const DatasetConfig& config,
                                            BuildReport* report, Diagnostics* diag) {
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  if (records.empty()) {
    if (diag) diag->warn("empty corpus: no samples built");
    return {};
  }
  std::map<std::string, std::vector<const MotifRecord*>> songs;
  for (const auto& r : records) songs[r.song_id].push_back(&r);

  std::vector<RepetitionSample> out;
  for (auto& [id, motifs] : songs) {
    std::sort(motifs.begin(), motifs.end(),
              [](const MotifRecord* a, const MotifRecord* b) { return a->bar_index < b->bar_index; });
    std::vector<const MotifRecord*> with_notes;
    std::vector<PitchView> views;
    for (const auto* m : motifs) {
      const Motif motif = detokenize(m->tokens, m->bar_index);
      if (motif.notes.empty()) continue;
      with_notes.push_back(m);
      views.push_back(pitch_view(motif));
    }
    if (with_notes.size() < 2) continue;
    const Key key = song_key(with_notes);
    for (std::size_t i = 0; i < with_notes.size(); ++i) {
      for (std::size_t j = i + 1; j < with_notes.size(); ++j) {
        const int a = with_notes[i]->bar_index, b = with_notes[j]->bar_index;
        if (a == b) {
          if (diag) diag->warn(id + ": duplicate bar index " + std::to_string(a));
          continue;
        }
        if (config.window > 0 && b - a > config.window) break;
        ++rep.pairs;
        const RepetitionLabel label = classify(views[i], views[j], key, config.threshold);
        if (label.type == RepetitionType::Ambiguous) {
          ++rep.ambiguous;
          continue;
        }
        if (label.type == RepetitionType::None) {
          ++rep.unrelated;
          continue;
        }
        ++rep.kept;
        out.push_back(RepetitionSample{id, a, b, label, key, with_notes[i]->tokens, with_notes[j]->tokens});
      }
    }
  }
  return out;
}

std::vector<RepetitionSample> build_dataset(const std::vector<Song>& corpus, const DatasetConfig& config,
                                            BuildReport* report, Diagnostics* diag) {
  std::vector<MotifRecord> records;
  for (const auto& song : corpus) {
    auto recs = ingest(song.notes, song.id, diag);
    records.insert(records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return build_dataset(records, config, report, diag);
}

DatasetSplit split(const std::vector<RepetitionSample>& samples, int holdout_songs, uint64_t seed) {
  if (holdout_songs < 0) throw Error("holdout song count must be >= 0");
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.song_id);
  if (static_cast<std::size_t>(holdout_songs) > ids.size()) {
    throw Error("cannot hold out " + std::to_string(holdout_songs) + " songs from " + std::to_string(ids.size()));
  }
  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);
  DatasetSplit out;
  out.holdout_song_ids.assign(order.begin(), order.begin() + holdout_songs);
  std::sort(out.holdout_song_ids.begin(), out.holdout_song_ids.end());
  const std::set<std::string> held(out.holdout_song_ids.begin(), out.holdout_song_ids.end());
  for (const auto& s : samples) (held.count(s.song_id) ? out.test : out.train).push_back(s);
  return out;
}

DatasetManifest stats(const std::vector<RepetitionSample>& samples, const std::string& split_name) {
  DatasetManifest m;
  m.split = split_name;
  std::array<double, kNumClasses> length_sum{};
  for (const auto& s : samples) {
    if (!is_trainable(s.label.type)) throw Error("sample with non-trainable label " + std::string(to_string(s.label.type)));
    const auto c = static_cast<std::size_t>(class_index(s.label.type));
    ++m.counts[c];
    length_sum[c] += s.input.valid_len;
  }
  m.total = static_cast<long>(samples.size());
  for (std::size_t c = 0; c < static_cast<std::size_t>(kNumClasses); ++c) {
    m.percentages[c] = m.total ? 100.0 * static_cast<double>(m.counts[c]) / static_cast<double>(m.total) : 0.0;
    m.avg_length[c] = m.counts[c] ? length_sum[c] / static_cast<double>(m.counts[c]) : 0.0;
  }
  return m;
}

json to_json(const DatasetManifest& m) {
  json labels = json::object();
  for (auto type : kTrainableTypes) {
    const auto c = static_cast<std::size_t>(class_index(type));
    labels[std::string(to_string(type))] = {
        {"count", m.counts[c]}, {"percentage", m.percentages[c]}, {"avg_length", m.avg_length[c]}};
  }
  return json{{"split", m.split}, {"total", m.total}, {"labels", labels}};
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %10s %12s %12s\n", "label", "count", "percent", "avg_len");
  out << "[" << m.split << "]\n" << line;
  for (auto type : kTrainableTypes) {
    const auto c = static_cast<std::size_t>(class_index(type));
    std::snprintf(line, sizeof line, "%-6s %10ld %11.2f%% %12.2f\n", std::string(to_string(type)).c_str(), m.counts[c],
                  m.percentages[c], m.avg_length[c]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-6s %10ld\n", "total", m.total);
  out << line;
  return out.str();
}

bool self_consistent(const RepetitionSample& s, double threshold) {
  return same_label(classify_tokens(s.input, s.target, s.key, threshold), s.label);
}

json sample_to_json(const RepetitionSample& s) {
  return json{{"song_id", s.song_id},
              {"bars", {s.bar_a, s.bar_b}},
              {"label", std::string(to_string(s.label.type))},
              {"detail", s.label.detail()},
              {"key", s.key.name()},
              {"input", {{"valid_len", s.input.valid_len}, {"rows", token_rows_to_json(s.input)}}},
              {"target", {{"valid_len", s.target.valid_len}, {"rows", token_rows_to_json(s.target)}}}};
}

RepetitionSample sample_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "missing");
    return j.at(key);
  };
  RepetitionSample s;
  const json& id = require("song_id");
  if (!id.is_string()) throw SchemaError(path + ".song_id", "expected a string");
  s.song_id = id.get<std::string>();
  const json& bars = require("bars");
  if (!bars.is_array() || bars.size() != 2 || !bars[0].is_number_integer() || !bars[1].is_number_integer()) {
    throw SchemaError(path + ".bars", "expected two integers");
  }
  s.bar_a = bars[0].get<int>();
  s.bar_b = bars[1].get<int>();
  const json& label = require("label");
  if (!label.is_string()) throw SchemaError(path + ".label", "expected a string");
  const std::string detail = j.value("detail", std::string());
  s.label = parse_label(label.get<std::string>(), detail, path);
  const json& key = require("key");
  const auto k = key.is_string() ? parse_key(key.get<std::string>()) : std::nullopt;
  if (!k) throw SchemaError(path + ".key", "expected a key name such as \"C major\"");
  s.key = *k;
  s.input = token_matrix_from_json(require("input"), path + ".input");
  s.target = token_matrix_from_json(require("target"), path + ".target");
  for (const auto* t : {&s.input, &s.target}) {
    try {
      validate(*t);
    } catch (const Error& e) {
      throw SchemaError(path + (t == &s.input ? ".input" : ".target"), e.what());
    }
  }
  return s;
}

void write_samples_jsonl(const std::vector<RepetitionSample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<RepetitionSample> read_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<RepetitionSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(where, e.what());
    }
    out.push_back(sample_from_json(j, where));
  }
  return out;
}

void write_dataset_dir(const std::filesystem::path& dir, const DatasetSplit& split, const DatasetConfig& config,
                       const BuildReport& report) {
  std::filesystem::create_directories(dir);
  write_samples_jsonl(split.train, dir / "train.jsonl");
  write_samples_jsonl(split.test, dir / "test.jsonl");
  const json manifest{{"config", to_json(config)},
                      {"build", to_json(report)},
                      {"holdout_song_ids", split.holdout_song_ids},
                      {"train", to_json(stats(split.train, "train"))},
                      {"test", to_json(stats(split.test, "test"))}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

DatasetSplit read_dataset_dir(const std::filesystem::path& dir) {
  DatasetSplit s;
  s.train = read_samples_jsonl(dir / "train.jsonl");
  s.test = read_samples_jsonl(dir / "test.jsonl");
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaError("manifest.json", e.what());
    }
    if (m.contains("holdout_song_ids")) s.holdout_song_ids = m.at("holdout_song_ids").get<std::vector<std::string>>();
  }
  return s;
}

}  // namespace motifrep
