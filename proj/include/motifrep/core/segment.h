/**
 * @file segment.h
 * @brief Grid quantization, bar segmentation and skyline melody extraction.
 */

#pragma once

#include <vector>

#include "motifrep/core/note.h"

namespace motifrep {

/// Snaps onsets and durations to the nearest sixteenth-note grid line (ties round up),
/// clamps durations to at least one slot and snaps velocities to their bin representative.
/// When ticks_per_quarter is not a multiple of 4 the result is rescaled by 4 so the grid
/// is integral.
NoteSequence quantize(const NoteSequence& seq);

/// One Motif per non-empty bar. Notes crossing a barline are split there; every piece
/// keeps pitch and velocity.
std::vector<Motif> segment_bars(const NoteSequence& seq);

/// Skyline melody: the highest pitch among the notes starting at each distinct onset,
/// ordered by onset. Throws on an empty motif.
std::vector<int> extract_melody(const Motif& motif);

}  // namespace motifrep
