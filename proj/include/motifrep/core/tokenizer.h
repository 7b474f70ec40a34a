/**
 * @file tokenizer.h
 * @brief Motif <-> TokenMatrix conversion.
 *
 * Each occupied slot emits one metric row (tempo, chord, position) followed by one
 * note row per note starting in that slot, ordered by pitch. Rows from valid_len on
 * are all pad.
 */

#pragma once

#include <array>
#include <vector>

#include "motifrep/core/chord.h"
#include "motifrep/core/note.h"
#include "motifrep/core/vocabulary.h"
#include "motifrep/error.h"

namespace motifrep {

using TokenRow = std::array<int, kNumAttributes>;

struct TokenMatrix {
  std::array<TokenRow, kMaxRows> rows{};
  int valid_len = 0;

  int at(int row, Attribute a) const { return rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(attr(a))]; }
  int& at(int row, Attribute a) { return rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(attr(a))]; }
  int note_count() const;
  bool operator==(const TokenMatrix&) const = default;
};

/// Throws VocabularyError on any out-of-range token, a non-pad row at or past valid_len,
/// or a pad-typed row inside the valid region.
void validate(const TokenMatrix& tokens);

TokenMatrix tokenize(const Motif& motif, double bpm, const ChordTrack& chords, Diagnostics* diag = nullptr);

/// Same as above with chords from label_chords(motif).
TokenMatrix tokenize(const Motif& motif, double bpm = kDefaultBpm, Diagnostics* diag = nullptr);

/// Rebuilds the notes of a token matrix. Metric rows are skipped and an end-of-sequence
/// row stops decoding.
Motif detokenize(const TokenMatrix& tokens, int bar_index = 0, int ticks_per_quarter = kDefaultTicksPerQuarter);

/// Tempo carried by the first valid row (default tempo when empty).
double token_bpm(const TokenMatrix& tokens);

}  // namespace motifrep
