/**
 * @file midi.h
 * @brief Standard MIDI File (format 0/1) reading and format-0 writing.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "motifrep/core/note.h"
#include "motifrep/error.h"

namespace motifrep {

/// Parses an SMF into a sorted NoteSequence.
///
/// Note-on/note-off pairs are matched first-in first-out per (channel, key). A note-on
/// left open at end of track is closed there and reported through `diag`.
/// Throws ParseError on malformed data and UnsupportedMeterError on any non-4/4
/// time-signature event.
NoteSequence parse_midi(std::span<const uint8_t> bytes, Diagnostics* diag = nullptr);

NoteSequence read_midi_file(const std::filesystem::path& path, Diagnostics* diag = nullptr);

/// Serializes to a single-track format-0 file with the sequence's tempo map and a 4/4
/// time signature.
std::vector<uint8_t> write_midi(const NoteSequence& seq);

void write_midi_file(const NoteSequence& seq, const std::filesystem::path& path);

}  // namespace motifrep
