#include "motifrep/core/tokenizer.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace motifrep {

VocabularyError::VocabularyError(int row, int attribute, int token)
    : Error("token " + std::to_string(token) + " out of vocabulary at row " + std::to_string(row) +
            ", attribute " + std::string(kAttributeNames[static_cast<std::size_t>(attribute)])),
      row_(row),
      attribute_(attribute),
      token_(token) {}

int TokenMatrix::note_count() const {
  int n = 0;
  for (int r = 0; r < valid_len; ++r) n += at(r, Attribute::Type) == static_cast<int>(TokenType::Note);
  return n;
}

void validate(const TokenMatrix& t) {
  if (t.valid_len < 0 || t.valid_len > kMaxRows) throw Error("valid_len out of range: " + std::to_string(t.valid_len));
  for (int r = 0; r < kMaxRows; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const int tok = t.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
      if (!in_vocabulary(k, tok) || (r >= t.valid_len && tok != kPad)) throw VocabularyError(r, k, tok);
    }
    if (r < t.valid_len && t.at(r, Attribute::Type) == kPad) throw VocabularyError(r, attr(Attribute::Type), kPad);
  }
}

TokenMatrix tokenize(const Motif& motif, double bpm, const ChordTrack& chords, Diagnostics* diag) {
  TokenMatrix out;
  const int64_t slot_ticks = motif.ticks_per_slot();
  const int64_t start = motif.bar_start();
  std::vector<Note> notes = motif.notes;
  std::sort(notes.begin(), notes.end());

  const int tempo = tempo_token(bpm);
  std::vector<TokenRow> rows;
  int last_slot = -1;
  int clamped = 0;
  for (const auto& n : notes) {
    const int64_t rel = n.onset - start;
    if (rel < 0 || rel >= motif.ticks_per_bar()) {
      throw Error("tokenize: note onset " + std::to_string(n.onset) + " outside bar " + std::to_string(motif.bar_index));
    }
    const int slot = static_cast<int>(rel / slot_ticks);
    const int chord = chord_token(chords[static_cast<std::size_t>(slot)]);
    if (slot != last_slot) {
      rows.push_back({tempo, chord, slot + 1, static_cast<int>(TokenType::Metric), kPad, kPad, kPad});
      last_slot = slot;
    }
    auto dur = static_cast<int>(std::llround(static_cast<double>(n.duration) / static_cast<double>(slot_ticks)));
    if (dur < 1 || dur > kDurationBins) {
      ++clamped;
      dur = std::clamp(dur, 1, kDurationBins);
    }
    rows.push_back({tempo, chord, slot + 1, static_cast<int>(TokenType::Note), std::clamp(n.pitch, 0, 127) + 1, dur,
                    velocity_bin(n.velocity) + 1});
  }
  if (clamped > 0 && diag) diag->warn("tokenize: " + std::to_string(clamped) + " durations clamped to 1..32 slots");
  if (rows.size() > static_cast<std::size_t>(kMaxRows)) {
    if (diag) {
      diag->warn("tokenize: bar " + std::to_string(motif.bar_index) + " encodes to " + std::to_string(rows.size()) +
                 " rows; truncated " + std::to_string(rows.size() - kMaxRows) + " rows");
    }
    rows.resize(kMaxRows);
  }
  std::copy(rows.begin(), rows.end(), out.rows.begin());
  out.valid_len = static_cast<int>(rows.size());
  return out;
}

TokenMatrix tokenize(const Motif& motif, double bpm, Diagnostics* diag) {
  return tokenize(motif, bpm, label_chords(motif), diag);
}

Motif detokenize(const TokenMatrix& t, int bar_index, int ticks_per_quarter) {
  Motif m;
  m.bar_index = bar_index;
  m.ticks_per_quarter = ticks_per_quarter;
  const int64_t slot_ticks = m.ticks_per_slot();
  if (t.valid_len < 0 || t.valid_len > kMaxRows) throw Error("valid_len out of range: " + std::to_string(t.valid_len));
  for (int r = 0; r < t.valid_len; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    for (int k = 0; k < kNumAttributes; ++k) {
      if (!in_vocabulary(k, row[static_cast<std::size_t>(k)])) throw VocabularyError(r, k, row[static_cast<std::size_t>(k)]);
    }
    const int type = t.at(r, Attribute::Type);
    if (type == static_cast<int>(TokenType::End)) break;
    if (type != static_cast<int>(TokenType::Note)) continue;
    for (Attribute a : {Attribute::Position, Attribute::Pitch, Attribute::Duration, Attribute::Velocity}) {
      if (t.at(r, a) == kPad) throw VocabularyError(r, attr(a), kPad);
    }
    Note n;
    n.pitch = t.at(r, Attribute::Pitch) - 1;
    n.onset = m.bar_start() + slot_ticks * (t.at(r, Attribute::Position) - 1);
    n.duration = slot_ticks * t.at(r, Attribute::Duration);
    n.velocity = velocity_from_bin(t.at(r, Attribute::Velocity) - 1);
    m.notes.push_back(n);
  }
  m.sort();
  return m;
}

double token_bpm(const TokenMatrix& t) {
  if (t.valid_len == 0 || t.at(0, Attribute::Tempo) == kPad) return kDefaultBpm;
  return tempo_from_token(t.at(0, Attribute::Tempo));
}

}  // namespace motifrep
