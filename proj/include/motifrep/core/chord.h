/**
 * @file chord.h
 * @brief Per-slot chord labels by template matching over sounding pitch classes.
 */

#pragma once

#include <array>
#include <string>

#include "motifrep/core/note.h"

namespace motifrep {

enum class ChordQuality : int { Major = 0, Minor, Diminished, Augmented, Sus2, Sus4, Dominant7, Major7, Minor7 };

inline constexpr int kChordQualities = 9;

struct ChordLabel {
  int root = -1;  // pitch class; -1 means no chord
  ChordQuality quality = ChordQuality::Major;

  bool none() const { return root < 0; }
  bool operator==(const ChordLabel&) const = default;
};

using ChordTrack = std::array<ChordLabel, kSlotsPerBar>;

int chord_token(const ChordLabel& chord);
ChordLabel chord_from_token(int token);
std::string chord_name(const ChordLabel& chord);

/// Best template for a set of pitch classes (bit i set = pitch class i sounding).
/// Fewer than two matching tones gives no chord.
ChordLabel match_chord(unsigned pitch_class_mask);

/// Chord label for each sixteenth slot of the bar from the notes sounding at the slot start.
ChordTrack label_chords(const Motif& motif);

}  // namespace motifrep
