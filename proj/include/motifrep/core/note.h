/**
 * @file note.h
 * @brief Note, NoteSequence and Motif value types.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace motifrep {

inline constexpr int kBeatsPerBar = 4;
inline constexpr int kSlotsPerBar = 16;
inline constexpr int kSlotsPerBeat = kSlotsPerBar / kBeatsPerBar;
inline constexpr int kDefaultTicksPerQuarter = 480;
inline constexpr double kDefaultBpm = 120.0;

struct Note {
  int pitch = 60;         // MIDI semitone, 0..127
  int64_t onset = 0;      // ticks from piece start
  int64_t duration = 1;   // ticks, >= 1
  int velocity = 80;      // 1..127

  // Ordered by (onset, pitch) first; duration/velocity only break ties.
  auto operator<=>(const Note& other) const {
    if (auto c = onset <=> other.onset; c != 0) return c;
    if (auto c = pitch <=> other.pitch; c != 0) return c;
    if (auto c = duration <=> other.duration; c != 0) return c;
    return velocity <=> other.velocity;
  }
  bool operator==(const Note&) const = default;

  int64_t end() const { return onset + duration; }
};

struct TempoEvent {
  int64_t tick = 0;
  double bpm = kDefaultBpm;
  bool operator==(const TempoEvent&) const = default;
};

/// A 4/4 piece: notes kept sorted by (onset, pitch).
struct NoteSequence {
  std::vector<Note> notes;
  int ticks_per_quarter = kDefaultTicksPerQuarter;
  std::vector<TempoEvent> tempo_events;

  void sort();
  bool empty() const { return notes.empty(); }
  /// Tempo in effect at tick 0 (default 120 bpm when no tempo event exists).
  double initial_bpm() const;
  int64_t ticks_per_bar() const { return int64_t{ticks_per_quarter} * kBeatsPerBar; }
  int64_t ticks_per_slot() const { return ticks_per_bar() / kSlotsPerBar; }
};

/// One bar of notes. Note times stay absolute (ticks from piece start).
struct Motif {
  int bar_index = 0;
  int ticks_per_quarter = kDefaultTicksPerQuarter;
  std::vector<Note> notes;

  bool empty() const { return notes.empty(); }
  int64_t ticks_per_bar() const { return int64_t{ticks_per_quarter} * kBeatsPerBar; }
  int64_t ticks_per_slot() const { return ticks_per_bar() / kSlotsPerBar; }
  int64_t bar_start() const { return ticks_per_bar() * bar_index; }

  /// Full pitch sequence ordered by (onset, pitch).
  std::vector<int> pitches() const;
  void sort();
};

/// Builds a monophonic motif with one note per slot (slot i holds pitches[i]).
Motif make_line_motif(const std::vector<int>& pitches, int bar_index = 0,
                      int ticks_per_quarter = kDefaultTicksPerQuarter, int velocity = 83);

}  // namespace motifrep
