#include "motifrep/core/chord.h"

#include <bit>
#include <vector>

namespace motifrep {
namespace {

constexpr std::array<std::array<int, 4>, kChordQualities> kTemplates = {{
    {0, 4, 7, -1},
    {0, 3, 7, -1},
    {0, 3, 6, -1},
    {0, 4, 8, -1},
    {0, 2, 7, -1},
    {0, 5, 7, -1},
    {0, 4, 7, 10},
    {0, 4, 7, 11},
    {0, 3, 7, 10},
}};

constexpr std::array<const char*, kChordQualities> kQualityNames = {"", "m", "dim", "aug", "sus2",
                                                                     "sus4", "7", "maj7", "m7"};
constexpr std::array<const char*, 12> kPitchNames = {"C", "C#", "D", "Eb", "E", "F",
                                                     "F#", "G", "Ab", "A", "Bb", "B"};

unsigned template_mask(int root, int quality) {
  unsigned mask = 0;
  for (int iv : kTemplates[static_cast<std::size_t>(quality)]) {
    if (iv >= 0) mask |= 1u << ((root + iv) % 12);
  }
  return mask;
}

}  // namespace

int chord_token(const ChordLabel& chord) {
  if (chord.none()) return 1;
  return 2 + chord.root * kChordQualities + static_cast<int>(chord.quality);
}

ChordLabel chord_from_token(int token) {
  if (token <= 1) return ChordLabel{};
  const int id = token - 2;
  return ChordLabel{id / kChordQualities, static_cast<ChordQuality>(id % kChordQualities)};
}

std::string chord_name(const ChordLabel& chord) {
  if (chord.none()) return "N";
  return std::string(kPitchNames[static_cast<std::size_t>(chord.root)]) +
         kQualityNames[static_cast<std::size_t>(chord.quality)];
}

ChordLabel match_chord(unsigned pitch_class_mask) {
  ChordLabel best;
  int best_score = 0;
  int best_size = 0;
  for (int root = 0; root < 12; ++root) {
    for (int q = 0; q < kChordQualities; ++q) {
      const unsigned t = template_mask(root, q);
      const int matches = std::popcount(t & pitch_class_mask);
      if (matches < 2) continue;
      const int missing = std::popcount(t & ~pitch_class_mask);
      const int extra = std::popcount(pitch_class_mask & ~t);
      const int score = 2 * matches - missing - extra;
      const int size = std::popcount(t);
      // Strictly better score wins; on ties prefer the smaller template. Loop order
      // then keeps the lowest root and quality.
      if (best.none() || score > best_score || (score == best_score && size < best_size)) {
        best = ChordLabel{root, static_cast<ChordQuality>(q)};
        best_score = score;
        best_size = size;
      }
    }
  }
  return best;
}

ChordTrack label_chords(const Motif& motif) {
  ChordTrack track{};
  const int64_t slot = motif.ticks_per_slot();
  const int64_t start = motif.bar_start();
  for (int s = 0; s < kSlotsPerBar; ++s) {
    const int64_t t = start + slot * s;
    unsigned mask = 0;
    for (const auto& n : motif.notes) {
      if (n.onset <= t && t < n.end()) mask |= 1u << (n.pitch % 12);
    }
    track[static_cast<std::size_t>(s)] = match_chord(mask);
  }
  return track;
}

}  // namespace motifrep
