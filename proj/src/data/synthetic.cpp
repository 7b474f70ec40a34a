#include "motifrep/data/synthetic.h"

#include <algorithm>
#include <cstdio>

#include "motifrep/core/vocabulary.h"
#include "motifrep/error.h"

namespace motifrep {
namespace {

constexpr int kMaxAttempts = 200;

int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.next() % static_cast<uint64_t>(hi - lo + 1)); }

/// Every in-key MIDI pitch in ascending order.
std::vector<int> scale_pitches(const Key& key) {
  std::vector<int> out;
  for (int p = 0; p < 128; ++p) {
    if (key.contains(p)) out.push_back(p);
  }
  return out;
}

struct Line {
  std::vector<int> slots;      // onset slot per note, ascending, first is 0
  std::vector<int> durations;  // in slots
  std::vector<int> degrees;    // indices into the scale list
  std::vector<int> velocities;
};

Line random_line(Rng& rng, int melody_floor) {
  Line l;
  const int n = uniform_int(rng, 4, 7);
  std::vector<int> pool;
  for (int s = 1; s < kSlotsPerBar; ++s) pool.push_back(s);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.next() % i]);
  l.slots.push_back(0);
  l.slots.insert(l.slots.end(), pool.begin(), pool.begin() + (n - 1));
  std::sort(l.slots.begin(), l.slots.end());
  for (int i = 0; i < n; ++i) {
    const int next = i + 1 < n ? l.slots[static_cast<std::size_t>(i) + 1] : kSlotsPerBar;
    const int gap = next - l.slots[static_cast<std::size_t>(i)];
    l.durations.push_back(std::max(1, gap - uniform_int(rng, 0, gap > 2 ? 1 : 0)));
    l.velocities.push_back(quantize_velocity(uniform_int(rng, 60, 100)));
  }
  int d = melody_floor + uniform_int(rng, 3, 7);
  for (int i = 0; i < n; ++i) {
    if (i > 0) d = std::clamp(d + uniform_int(rng, -3, 3), melody_floor, melody_floor + 12);
    l.degrees.push_back(d);
  }
  return l;
}

/// Degrees following `dev` with random step sizes, starting near `start`.
std::vector<int> follow(const DevSequence& dev, int start, Rng& rng) {
  std::vector<int> out{start};
  for (Direction dir : dev) out.push_back(out.back() + static_cast<int>(dir) * uniform_int(rng, 1, 3));
  return out;
}

DevSequence degree_development(const std::vector<int>& degrees) { return development(degrees); }

struct Bass {
  bool present = false;
  int pitch = 0;
};

void append_bar(NoteSequence& seq, int bar, const Line& line, const std::vector<int>& pitches, const Bass& bass) {
  const int64_t slot = seq.ticks_per_slot();
  const int64_t start = seq.ticks_per_bar() * bar;
  if (bass.present) seq.notes.push_back(Note{bass.pitch, start, slot * kSlotsPerBar, quantize_velocity(70)});
  for (std::size_t i = 0; i < pitches.size(); ++i) {
    seq.notes.push_back(Note{pitches[i], start + slot * line.slots[i], slot * line.durations[i], line.velocities[i]});
  }
}

}  // namespace

std::pair<int, int> synthetic_tempo_band(RepetitionType type) {
  const int lo = 60 + 20 * class_index(type);
  return {lo + 2, lo + 17};
}

Song synthetic_song(RepetitionType type, Rng& rng, const std::string& id, double accompaniment_rate) {
  if (!is_trainable(type)) throw Error("synthetic songs need a trainable repetition type");
  const auto [lo, hi] = synthetic_tempo_band(type);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Key key{uniform_int(rng, 0, 11), rng.next() % 2 ? Mode::Minor : Mode::Major};
    const std::vector<int> scale = scale_pitches(key);
    // melody floor: first in-key pitch at or above G3
    const int floor = static_cast<int>(std::lower_bound(scale.begin(), scale.end(), 55) - scale.begin());
    Line seed = random_line(rng, floor);
    Line variant = seed;
    const bool with_bass = rng.uniform() < accompaniment_rate;
    const int bass_degree = static_cast<int>(std::lower_bound(scale.begin(), scale.end(), 36 + key.tonic) - scale.begin());
    Bass bass_a{with_bass, scale[static_cast<std::size_t>(bass_degree)]};
    Bass bass_b = bass_a;
    std::vector<int> pa, pb;
    for (int d : seed.degrees) pa.push_back(scale[static_cast<std::size_t>(d)]);

    switch (type) {
      case RepetitionType::StR:
        pb = pa;
        for (auto& v : variant.velocities) v = quantize_velocity(std::clamp(v + uniform_int(rng, -12, 12), 1, 127));
        break;
      case RepetitionType::TrR:
        if (rng.next() % 2) {
          int t = uniform_int(rng, 1, 7);
          if (rng.next() % 2) t = -t;
          for (int p : pa) pb.push_back(p + t);
          bass_b.pitch += t;
        } else {
          int d = uniform_int(rng, 1, 4);
          if (rng.next() % 2) d = -d;
          for (int deg : seed.degrees) pb.push_back(scale[static_cast<std::size_t>(deg + d)]);
          bass_b.pitch = scale[static_cast<std::size_t>(bass_degree + d)];
        }
        break;
      case RepetitionType::SuR: {
        variant.degrees = seed.degrees;
        const auto i = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(seed.degrees.size()) - 1));
        int step = uniform_int(rng, 1, 3);
        if (rng.next() % 2) step = -step;
        variant.degrees[i] += step;
        for (int d : variant.degrees) pb.push_back(scale[static_cast<std::size_t>(d)]);
        break;
      }
      case RepetitionType::HoR:
      case RepetitionType::SyR: {
        DevSequence dev = degree_development(seed.degrees);
        if (type == RepetitionType::SyR) {
          switch (rng.next() % 3) {
            case 0:
              dev = negate(dev);
              break;
            case 1:
              dev = reversed(dev);
              break;
            default:
              dev = negate(reversed(dev));
          }
        }
        variant.degrees = follow(dev, floor + uniform_int(rng, 3, 9), rng);
        for (int d : variant.degrees) pb.push_back(scale[static_cast<std::size_t>(std::clamp(d, 0, static_cast<int>(scale.size()) - 1))]);
        break;
      }
      default:
        break;
    }

    NoteSequence seq;
    seq.ticks_per_quarter = kDefaultTicksPerQuarter;
    seq.tempo_events.push_back(TempoEvent{0, static_cast<double>(uniform_int(rng, lo, hi))});
    append_bar(seq, 0, seed, pa, bass_a);
    append_bar(seq, 1, variant, pb, bass_b);
    seq.sort();

    Song song{id, seq};
    const auto samples = build_dataset(std::vector<Song>{song}, DatasetConfig{});
    if (samples.size() == 1 && samples[0].label.type == type) return song;
  }
  throw Error("no verified synthetic " + std::string(to_string(type)) + " song after " + std::to_string(kMaxAttempts) +
              " attempts");
}

std::vector<Song> synthetic_corpus(const SyntheticConfig& config) {
  if (config.songs_per_class < 0) throw Error("songs_per_class must be >= 0");
  Rng rng(config.seed);
  std::vector<Song> out;
  char id[32];
  for (int i = 0; i < config.songs_per_class; ++i) {
    for (auto type : kTrainableTypes) {
      std::snprintf(id, sizeof id, "song-%05zu", out.size());
      out.push_back(synthetic_song(type, rng, id, config.accompaniment_rate));
    }
  }
  return out;
}

}  // namespace motifrep
