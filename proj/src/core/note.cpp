#include "motifrep/core/note.h"

#include <algorithm>

#include "motifrep/error.h"

namespace motifrep {

void NoteSequence::sort() {
  std::sort(notes.begin(), notes.end());
  std::stable_sort(tempo_events.begin(), tempo_events.end(),
                   [](const TempoEvent& a, const TempoEvent& b) { return a.tick < b.tick; });
}

double NoteSequence::initial_bpm() const {
  double bpm = kDefaultBpm;
  for (const auto& ev : tempo_events) {
    if (ev.tick > 0) break;
    bpm = ev.bpm;
  }
  return bpm;
}

std::vector<int> Motif::pitches() const {
  std::vector<Note> sorted = notes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> out;
  out.reserve(sorted.size());
  for (const auto& n : sorted) out.push_back(n.pitch);
  return out;
}

void Motif::sort() { std::sort(notes.begin(), notes.end()); }

Motif make_line_motif(const std::vector<int>& pitches, int bar_index, int ticks_per_quarter,
                      int velocity) {
  if (pitches.size() > static_cast<std::size_t>(kSlotsPerBar)) {
    throw Error("make_line_motif: at most 16 notes fit in one bar");
  }
  Motif m;
  m.bar_index = bar_index;
  m.ticks_per_quarter = ticks_per_quarter;
  const int64_t slot = m.ticks_per_slot();
  for (std::size_t i = 0; i < pitches.size(); ++i) {
    m.notes.push_back(Note{pitches[i], m.bar_start() + slot * static_cast<int64_t>(i), slot, velocity});
  }
  return m;
}

}  // namespace motifrep
