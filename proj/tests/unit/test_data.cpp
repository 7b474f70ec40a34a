#include <filesystem>
#include <numeric>
#include <set>

#include "doctest.h"
#include "motifrep/core/tokenizer.h"
#include "motifrep/data/dataset.h"
#include "motifrep/data/synthetic.h"
#include "motifrep/error.h"

using namespace motifrep;
namespace fs = std::filesystem;

namespace {

constexpr int C4 = 60, D4 = 62, Eb4 = 63, E4 = 64, F4 = 65, G4 = 67;

/// A song whose bar i holds the line `bars[i]`, one note per slot.
Song line_song(const std::string& id, const std::vector<std::vector<int>>& bars) {
  Song s{id, {}};
  for (std::size_t b = 0; b < bars.size(); ++b) {
    const Motif m = make_line_motif(bars[b], static_cast<int>(b));
    s.notes.notes.insert(s.notes.notes.end(), m.notes.begin(), m.notes.end());
  }
  s.notes.sort();
  return s;
}

std::vector<RepetitionSample> fake_samples(int songs, int per_song) {
  std::vector<RepetitionSample> out;
  for (int s = 0; s < songs; ++s) {
    for (int i = 0; i < per_song; ++i) {
      RepetitionSample r;
      r.song_id = "s" + std::to_string(s);
      r.bar_b = i + 1;
      r.label.type = RepetitionType::StR;
      out.push_back(r);
    }
  }
  return out;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("motifrep_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("identical bars form a StR sample") {
  const auto samples = build_dataset({line_song("a", {{C4, E4, G4}, {C4, E4, G4}})}, DatasetConfig{});
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].label.type == RepetitionType::StR);
  CHECK(samples[0].bar_a == 0);
  CHECK(samples[0].bar_b == 1);
}

TEST_CASE("fate motif answered a step lower is a diatonic TrR") {
  const auto samples = build_dataset({line_song("fate", {{G4, G4, G4, Eb4}, {F4, F4, F4, D4}})}, DatasetConfig{});
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].label.type == RepetitionType::TrR);
  CHECK(samples[0].label.detail() == "diatonic:-1");
}

TEST_CASE("unrelated bars yield no samples") {
  BuildReport report;
  const auto samples =
      build_dataset({line_song("u", {{C4, C4, C4, C4, C4}, {G4, E4, D4, F4, C4, G4}})}, DatasetConfig{}, &report);
  CHECK(samples.empty());
  CHECK(report.pairs == 1);
  CHECK(report.unrelated + report.ambiguous == 1);
}

TEST_CASE("window limits the bar distance of pairs") {
  const Song s = line_song("w", {{C4, E4}, {C4, E4}, {C4, E4}, {C4, E4}});
  DatasetConfig all;
  DatasetConfig near;
  near.window = 1;
  CHECK(build_dataset({s}, all).size() == 6);
  const auto n = build_dataset({s}, near);
  CHECK(n.size() == 3);
  for (const auto& r : n) CHECK(r.bar_b - r.bar_a == 1);
}

TEST_CASE("build output is sorted and self-consistent") {
  const auto samples = build_dataset(synthetic_corpus({10, 3, 0.5}), DatasetConfig{});
  REQUIRE(!samples.empty());
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& p = samples[i - 1];
    const auto& q = samples[i];
    CHECK(std::tie(p.song_id, p.bar_a, p.bar_b) < std::tie(q.song_id, q.bar_a, q.bar_b));
  }
  for (const auto& s : samples) CHECK(self_consistent(s));
}

TEST_CASE("split is deterministic and disjoint by song") {
  const auto samples = fake_samples(20, 3);
  const auto a = split(samples, 5, 11);
  const auto b = split(samples, 5, 11);
  CHECK(a.holdout_song_ids == b.holdout_song_ids);
  CHECK(a.holdout_song_ids.size() == 5);
  CHECK(a.train.size() + a.test.size() == samples.size());
  CHECK(a.test.size() == 15);
  std::set<std::string> train_ids;
  for (const auto& s : a.train) train_ids.insert(s.song_id);
  for (const auto& s : a.test) CHECK(train_ids.count(s.song_id) == 0);
  CHECK(std::is_sorted(a.holdout_song_ids.begin(), a.holdout_song_ids.end()));
  CHECK(split(samples, 5, 12).holdout_song_ids != a.holdout_song_ids);
}

TEST_CASE("split edge cases") {
  const auto samples = fake_samples(4, 2);
  const auto none = split(samples, 0, 1);
  CHECK(none.test.empty());
  CHECK(none.train.size() == samples.size());
  CHECK(split(samples, 4, 1).train.empty());
  CHECK_THROWS_AS(split(samples, 5, 1), Error);
}

TEST_CASE("stats percentages") {
  std::vector<RepetitionSample> samples;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < 3; ++i) {
      RepetitionSample r;
      r.label.type = kTrainableTypes[c];
      r.input.valid_len = 4 + c;
      samples.push_back(r);
    }
  }
  const auto m = stats(samples);
  CHECK(m.total == 15);
  for (int c = 0; c < kNumClasses; ++c) {
    CHECK(m.counts[c] == 3);
    CHECK(m.percentages[c] == doctest::Approx(20.0));
    CHECK(m.avg_length[c] == doctest::Approx(4.0 + c));
  }
  const auto empty = stats({});
  CHECK(empty.total == 0);
  for (int c = 0; c < kNumClasses; ++c) CHECK(empty.percentages[c] == 0.0);
}

TEST_CASE("percentages of the synthetic dataset sum to 100") {
  const auto m = stats(build_dataset(synthetic_corpus({20, 5, 0.5}), DatasetConfig{}));
  const double sum = std::accumulate(m.percentages.begin(), m.percentages.end(), 0.0);
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-4));
}

TEST_CASE("sample JSON round trip") {
  const auto samples = build_dataset({line_song("fate", {{G4, G4, G4, Eb4}, {F4, F4, F4, D4}})}, DatasetConfig{});
  REQUIRE(samples.size() == 1);
  const RepetitionSample back = sample_from_json(sample_to_json(samples[0]));
  CHECK(back.song_id == "fate");
  CHECK(back.label == samples[0].label);
  CHECK(back.key == samples[0].key);
  CHECK(back.input == samples[0].input);
  CHECK(back.target == samples[0].target);
}

TEST_CASE("malformed sample JSON names the field") {
  nlohmann::json j = sample_to_json(build_dataset({line_song("a", {{C4}, {C4}})}, DatasetConfig{}).at(0));
  j["label"] = "Nope";
  try {
    sample_from_json(j, "f.jsonl:3");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path().find("f.jsonl:3") == 0);
  }
}

TEST_CASE("dataset directory round trip") {
  const auto samples = build_dataset(synthetic_corpus({6, 2, 0.5}), DatasetConfig{});
  const auto parts = split(samples, 5, 3);
  const fs::path dir = temp_dir("dataset_dir");
  write_dataset_dir(dir, parts, DatasetConfig{}, BuildReport{});
  CHECK(fs::exists(dir / "manifest.json"));
  const auto back = read_dataset_dir(dir);
  CHECK(back.train.size() == parts.train.size());
  CHECK(back.test.size() == parts.test.size());
  CHECK(back.holdout_song_ids == parts.holdout_song_ids);
  for (std::size_t i = 0; i < back.train.size(); ++i) CHECK(back.train[i].input == parts.train[i].input);
  fs::remove_all(dir);
}

TEST_CASE("dataset config from JSON") {
  const auto c = dataset_config_from_json({{"window", 2}, {"holdout_songs", 7}});
  CHECK(c.window == 2);
  CHECK(c.holdout_songs == 7);
  CHECK(c.threshold == kSimilarityThreshold);
  CHECK_THROWS_AS(dataset_config_from_json({{"window", "two"}}), SchemaError);
}

TEST_CASE("synthetic corpus is balanced, deterministic and self-labeling") {
  const SyntheticConfig config{40, 9, 0.5};
  const auto corpus = synthetic_corpus(config);
  CHECK(corpus.size() == 200);
  const auto again = synthetic_corpus(config);
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(corpus[i].notes.notes == again[i].notes.notes);

  BuildReport report;
  const auto samples = build_dataset(corpus, DatasetConfig{}, &report);
  CHECK(report.pairs == 200);
  CHECK(report.kept == 200);
  const auto m = stats(samples);
  for (int c = 0; c < kNumClasses; ++c) CHECK(m.counts[c] == 40);
}

TEST_CASE("synthetic tempo bands are disjoint") {
  for (int a = 0; a < kNumClasses; ++a) {
    const auto [lo, hi] = synthetic_tempo_band(kTrainableTypes[a]);
    CHECK(lo < hi);
    for (int b = a + 1; b < kNumClasses; ++b) {
      const auto [lo2, hi2] = synthetic_tempo_band(kTrainableTypes[b]);
      CHECK((hi < lo2 || hi2 < lo));
    }
  }
}
