#include "motifrep/core/vocabulary.h"

#include <algorithm>
#include <cmath>

namespace motifrep {

int tempo_token(double bpm) {
  const long bin = std::lround((bpm - kTempoMinBpm) / kTempoBinWidth);
  return 1 + static_cast<int>(std::clamp<long>(bin, 0, kTempoBins - 1));
}

double tempo_from_token(int token) {
  return kTempoMinBpm + kTempoBinWidth * std::clamp(token - 1, 0, kTempoBins - 1);
}

int velocity_bin(int velocity) { return std::clamp((std::clamp(velocity, 1, 127) - 1) / 4, 0, kVelocityBins - 1); }

int velocity_from_bin(int bin) { return std::min(127, 4 * std::clamp(bin, 0, kVelocityBins - 1) + 3); }

int quantize_velocity(int velocity) { return velocity_from_bin(velocity_bin(velocity)); }

}  // namespace motifrep
