/**
 * @file rng.h
 * @brief Seeded random draws that are identical on every platform.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace motifrep {

/// Platform-independent uniform/normal draws on top of mt19937_64.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();
  uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace motifrep
