/**
 * @file dataset.h
 * @brief Labeled repetition datasets: motif-pair enumeration within songs, song-level
 *        train/test split, per-label statistics and the JSON Lines dataset directory.
 *
 * Dataset directory layout: train.jsonl, test.jsonl, manifest.json.
 */

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motifrep/core/motif_io.h"
#include "motifrep/core/note.h"
#include "motifrep/rules/repetition.h"

namespace motifrep {

/// An ordered motif pair (earlier bar -> later bar) and its repetition label.
struct RepetitionSample {
  std::string song_id;
  int bar_a = 0;
  int bar_b = 0;
  RepetitionLabel label;
  Key key;  // song key used for diatonic transposition
  TokenMatrix input;
  TokenMatrix target;
};

struct DatasetConfig {
  int window = 0;  // max bar distance of a pair; 0 pairs every bar of a song
  int holdout_songs = 100;
  uint64_t seed = 0;
  double threshold = kSimilarityThreshold;
};

nlohmann::json to_json(const DatasetConfig& c);
/// Missing keys keep their defaults; type errors raise SchemaError.
DatasetConfig dataset_config_from_json(const nlohmann::json& j);

struct Song {
  std::string id;
  NoteSequence notes;
};

/// Pair enumeration counts; pairs labeled None or Ambiguous are dropped.
struct BuildReport {
  long pairs = 0;
  long kept = 0;
  long ambiguous = 0;
  long unrelated = 0;
  double ambiguous_rate() const { return pairs ? static_cast<double>(ambiguous) / static_cast<double>(pairs) : 0.0; }
};

nlohmann::json to_json(const BuildReport& r);

/// Quantize, segment into bars and tokenize at the song's initial tempo.
std::vector<MotifRecord> ingest(const NoteSequence& seq, const std::string& song_id, Diagnostics* diag = nullptr);

/// Classify two token matrices as motifs. A matrix without notes yields None.
RepetitionLabel classify_tokens(const TokenMatrix& a, const TokenMatrix& b, const Key& key,
                                double threshold = kSimilarityThreshold);

/// Song key inferred from the notes of all of a song's motifs.
Key song_key(const std::vector<const MotifRecord*>& motifs);

/// Every ordered pair (i, j), i < j, within `window` bars of each song, classified and kept
/// unless None or Ambiguous. Output is sorted by (song_id, bar_a, bar_b).
std::vector<RepetitionSample> build_dataset(const std::vector<MotifRecord>& records, const DatasetConfig& config,
                                            BuildReport* report = nullptr, Diagnostics* diag = nullptr);
std::vector<RepetitionSample> build_dataset(const std::vector<Song>& corpus, const DatasetConfig& config,
                                            BuildReport* report = nullptr, Diagnostics* diag = nullptr);

struct DatasetSplit {
  std::vector<RepetitionSample> train;
  std::vector<RepetitionSample> test;
  std::vector<std::string> holdout_song_ids;  // sorted
};

/// Holds out every sample of `holdout_songs` randomly chosen songs. Throws when fewer
/// distinct songs exist.
DatasetSplit split(const std::vector<RepetitionSample>& samples, int holdout_songs, uint64_t seed);

struct DatasetManifest {
  std::string split;
  long total = 0;
  std::array<long, kNumClasses> counts{};
  std::array<double, kNumClasses> percentages{};
  std::array<double, kNumClasses> avg_length{};  // mean input valid_len
  std::vector<std::string> holdout_song_ids;
};

DatasetManifest stats(const std::vector<RepetitionSample>& samples, const std::string& split_name = "train");
nlohmann::json to_json(const DatasetManifest& m);
/// Aligned text table: label, count, percentage, average length.
std::string format_manifest(const DatasetManifest& m);

/// classify(input, target) under the stored key reproduces the stored label and detail.
bool self_consistent(const RepetitionSample& s, double threshold = kSimilarityThreshold);

nlohmann::json sample_to_json(const RepetitionSample& s);
RepetitionSample sample_from_json(const nlohmann::json& j, const std::string& path = "$");
void write_samples_jsonl(const std::vector<RepetitionSample>& samples, const std::filesystem::path& path);
std::vector<RepetitionSample> read_samples_jsonl(const std::filesystem::path& path);

/// Writes train.jsonl, test.jsonl and manifest.json under `dir` (created if needed).
void write_dataset_dir(const std::filesystem::path& dir, const DatasetSplit& split, const DatasetConfig& config,
                       const BuildReport& report);
/// Reads train.jsonl and test.jsonl (and the holdout list from manifest.json).
DatasetSplit read_dataset_dir(const std::filesystem::path& dir);

}  // namespace motifrep
