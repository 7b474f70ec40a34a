/**
 * @file repetition.h
 * @brief Motif-level repetition types and the pairwise classifier.
 *
 * Precedence follows the definitions: strict, then transpositional, then
 * subsequential; homodirectional and symmetric are only considered for pairs that are
 * none of the first three, and a pair satisfying both is reported as Ambiguous.
 * Strict compares full pitch sequences; every other test compares skyline melodies.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motifrep/core/note.h"

namespace motifrep {

inline constexpr double kSimilarityThreshold = 0.75;

enum class RepetitionType : int { StR = 0, TrR, SuR, HoR, SyR, Ambiguous, None };

/// Trainable classes (StR..SyR).
inline constexpr int kNumClasses = 5;
inline constexpr std::array<RepetitionType, kNumClasses> kTrainableTypes = {
    RepetitionType::StR, RepetitionType::TrR, RepetitionType::SuR, RepetitionType::HoR, RepetitionType::SyR};

std::string_view to_string(RepetitionType type);
std::optional<RepetitionType> parse_repetition_type(std::string_view name);
inline bool is_trainable(RepetitionType t) { return static_cast<int>(t) < kNumClasses; }
inline int class_index(RepetitionType t) { return static_cast<int>(t); }

enum class TranspositionKind { Chromatic, Diatonic };
enum class SymmetryKind { Horizontal, Vertical, Rotational };

std::string_view to_string(TranspositionKind kind);
std::string_view to_string(SymmetryKind kind);

struct Transposition {
  TranspositionKind kind = TranspositionKind::Chromatic;
  int offset = 0;  // semitones (chromatic) or scale degrees (diatonic), never 0
  bool operator==(const Transposition&) const = default;
};

struct RepetitionLabel {
  RepetitionType type = RepetitionType::None;
  std::optional<Transposition> transposition;  // set for TrR
  std::optional<SymmetryKind> symmetry;        // set for SyR and Ambiguous

  /// "chromatic:+2", "diatonic:-1", "horizontal", ... or empty.
  std::string detail() const;
  bool operator==(const RepetitionLabel&) const = default;
};

// --- development ------------------------------------------------------------------

enum class Direction : int8_t { Down = -1, Same = 0, Up = 1 };
using DevSequence = std::vector<Direction>;

DevSequence development(std::span<const int> melody);
DevSequence negate(const DevSequence& dev);
DevSequence reversed(const DevSequence& dev);
std::string to_string(const DevSequence& dev);

// --- keys -------------------------------------------------------------------------

enum class Mode { Major, Minor };

struct Key {
  int tonic = 0;  // pitch class
  Mode mode = Mode::Major;

  /// Seven pitch classes of the (natural) diatonic scale, tonic first.
  std::array<int, 7> scale() const;
  bool contains(int pitch) const;
  /// Scale-degree number of an in-scale pitch counted from the tonic in octave 0.
  std::optional<int> degree(int pitch) const;
  std::string name() const;
  bool operator==(const Key&) const = default;
};

std::optional<Key> parse_key(std::string_view name);

/// Highest Pearson correlation between the pitch-class duration profile and the 24
/// rotated major/minor key profiles. Ties go to the key whose tonic is the pitch class
/// of the lowest note at the final onset, then to the lowest tonic, major first.
Key infer_key(std::span<const Note> notes);
Key infer_key(const NoteSequence& seq);

// --- similarity -------------------------------------------------------------------

template <typename T>
int lcs_length(std::span<const T> p, std::span<const T> q) {
  std::vector<int> prev(q.size() + 1, 0), cur(q.size() + 1, 0);
  for (std::size_t i = 1; i <= p.size(); ++i) {
    for (std::size_t j = 1; j <= q.size(); ++j) {
      cur[j] = p[i - 1] == q[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[q.size()];
}

/// |LCS(p, q)| / max(|p|, |q|); 0 when either side is empty.
template <typename T>
double lcs_similarity(std::span<const T> p, std::span<const T> q) {
  if (p.empty() || q.empty()) return 0.0;
  return static_cast<double>(lcs_length(p, q)) / static_cast<double>(std::max(p.size(), q.size()));
}

inline double lcs_similarity(const std::vector<int>& p, const std::vector<int>& q) {
  return lcs_similarity(std::span<const int>(p), std::span<const int>(q));
}
inline double lcs_similarity(const DevSequence& p, const DevSequence& q) {
  return lcs_similarity(std::span<const Direction>(p), std::span<const Direction>(q));
}

// --- pairwise tests ---------------------------------------------------------------

bool is_strict(const Motif& a, const Motif& b);
std::optional<Transposition> transposition(const Motif& a, const Motif& b, const Key& key);
bool is_subsequential(const Motif& a, const Motif& b, double threshold = kSimilarityThreshold);
std::optional<SymmetryKind> symmetry(const Motif& a, const Motif& b, double threshold = kSimilarityThreshold);
bool is_homodirectional(const Motif& a, const Motif& b, double threshold = kSimilarityThreshold);

/// Throws on an empty motif.
RepetitionLabel classify(const Motif& a, const Motif& b, const Key& key, double threshold = kSimilarityThreshold);

/// Pitch-list form of the same tests. `full_*` are the complete pitch sequences used by
/// the strict and chromatic tests, `melody_*` the skyline melodies used by the rest.
struct PitchView {
  std::vector<int> full;
  std::vector<int> melody;
};
PitchView pitch_view(const Motif& m);
RepetitionLabel classify(const PitchView& a, const PitchView& b, const Key& key,
                         double threshold = kSimilarityThreshold);

}  // namespace motifrep
