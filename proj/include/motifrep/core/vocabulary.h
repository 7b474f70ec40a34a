/**
 * @file vocabulary.h
 * @brief Compound-token vocabulary: seven attributes, token 0 is pad in each.
 *
 * Token layout per attribute:
 *   tempo     1..64   bpm bins of 3 bpm starting at 32 bpm
 *   chord     1       no chord; 2..109 = 2 + root * 9 + quality
 *   position  1..16   sixteenth-note slot + 1
 *   type      1 metric, 2 note, 3 end-of-sequence
 *   pitch     1..128  MIDI pitch + 1
 *   duration  1..32   length in sixteenth-note slots
 *   velocity  1..32   velocity bin + 1, bin = (velocity - 1) / 4
 */

#pragma once

#include <array>
#include <string_view>

namespace motifrep {

enum class Attribute : int { Tempo = 0, Chord, Position, Type, Pitch, Duration, Velocity };

inline constexpr int kNumAttributes = 7;
inline constexpr int kMaxRows = 120;
inline constexpr int kPad = 0;

/// Number of token ids per attribute, pad included.
inline constexpr std::array<int, kNumAttributes> kVocabSizes = {65, 110, 17, 4, 129, 33, 33};

inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "tempo", "chord", "position", "type", "pitch", "duration", "velocity"};

inline constexpr int attr(Attribute a) { return static_cast<int>(a); }

enum class TokenType : int { Pad = 0, Metric = 1, Note = 2, End = 3 };

inline constexpr int kTempoBins = 64;
inline constexpr double kTempoMinBpm = 32.0;
inline constexpr double kTempoBinWidth = 3.0;
inline constexpr int kDurationBins = 32;
inline constexpr int kVelocityBins = 32;

inline constexpr bool in_vocabulary(int attribute, int token) {
  return token >= 0 && token < kVocabSizes[static_cast<std::size_t>(attribute)];
}

int tempo_token(double bpm);
double tempo_from_token(int token);

int velocity_bin(int velocity);
/// Representative velocity of a bin; quantized velocities are fixed points.
int velocity_from_bin(int bin);
int quantize_velocity(int velocity);

}  // namespace motifrep
