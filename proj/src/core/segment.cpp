#include "motifrep/core/segment.h"

#include <algorithm>
#include <map>

#include "motifrep/core/vocabulary.h"
#include "motifrep/error.h"

namespace motifrep {
namespace {

int64_t snap(int64_t ticks, int64_t grid) {
  // floor((t + g/2) / g) for non-negative t
  return ((ticks + grid / 2) / grid) * grid;
}

}  // namespace

NoteSequence quantize(const NoteSequence& seq) {
  NoteSequence out;
  int64_t scale = 1;
  out.ticks_per_quarter = seq.ticks_per_quarter;
  if (seq.ticks_per_quarter % kSlotsPerBeat != 0) {
    scale = kSlotsPerBeat;
    out.ticks_per_quarter = seq.ticks_per_quarter * kSlotsPerBeat;
  }
  const int64_t grid = out.ticks_per_slot();
  out.notes.reserve(seq.notes.size());
  for (const auto& n : seq.notes) {
    Note q = n;
    q.onset = snap(n.onset * scale, grid);
    q.duration = std::max(grid, snap(n.duration * scale, grid));
    q.velocity = quantize_velocity(n.velocity);
    out.notes.push_back(q);
  }
  for (const auto& t : seq.tempo_events) out.tempo_events.push_back(TempoEvent{t.tick * scale, t.bpm});
  out.sort();
  return out;
}

std::vector<Motif> segment_bars(const NoteSequence& seq) {
  std::map<int64_t, Motif> bars;
  const int64_t bar_len = seq.ticks_per_bar();
  for (const auto& n : seq.notes) {
    int64_t onset = n.onset;
    const int64_t end = n.end();
    while (onset < end) {
      const int64_t bar = onset / bar_len;
      const int64_t piece_end = std::min(end, (bar + 1) * bar_len);
      auto [it, inserted] = bars.try_emplace(bar);
      if (inserted) {
        it->second.bar_index = static_cast<int>(bar);
        it->second.ticks_per_quarter = seq.ticks_per_quarter;
      }
      it->second.notes.push_back(Note{n.pitch, onset, piece_end - onset, n.velocity});
      onset = piece_end;
    }
  }
  std::vector<Motif> out;
  out.reserve(bars.size());
  for (auto& [index, motif] : bars) {
    motif.sort();
    out.push_back(std::move(motif));
  }
  return out;
}

std::vector<int> extract_melody(const Motif& motif) {
  if (motif.empty()) throw Error("extract_melody: empty motif");
  std::map<int64_t, int> top;
  for (const auto& n : motif.notes) {
    auto [it, inserted] = top.try_emplace(n.onset, n.pitch);
    if (!inserted) it->second = std::max(it->second, n.pitch);
  }
  std::vector<int> melody;
  melody.reserve(top.size());
  for (const auto& [onset, pitch] : top) melody.push_back(pitch);
  return melody;
}

}  // namespace motifrep
