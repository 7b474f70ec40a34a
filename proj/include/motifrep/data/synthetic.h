/**
 * @file synthetic.h
 * @brief Seeded synthetic corpus: two-bar songs made of a random diatonic motif and a
 *        constructed repetition of one type, each verified with the rule classifier.
 *
 * The song tempo is drawn from a band tied to the repetition type, so the type of the
 * second bar is predictable from the first bar's tokens alone.
 */

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "motifrep/core/rng.h"
#include "motifrep/data/dataset.h"

namespace motifrep {

struct SyntheticConfig {
  int songs_per_class = 500;
  uint64_t seed = 1;
  double accompaniment_rate = 0.5;  // probability of a sustained bass note under each bar
};

/// Inclusive bpm range used for songs of a type; bands of different types do not share a tempo token.
std::pair<int, int> synthetic_tempo_band(RepetitionType type);

/// One verified song whose single motif pair classifies as `type`. Throws if no candidate
/// verifies within the attempt budget.
Song synthetic_song(RepetitionType type, Rng& rng, const std::string& id, double accompaniment_rate = 0.5);

/// songs_per_class songs of each trainable type, interleaved by type, ids "song-00000", ...
std::vector<Song> synthetic_corpus(const SyntheticConfig& config);

}  // namespace motifrep
