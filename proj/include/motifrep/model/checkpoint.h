/**
 * @file checkpoint.h
 * @brief Versioned binary checkpoint of a ModelState.
 *
 * Layout (little-endian): "MOTIFREP", u32 version, u32 length + model config JSON,
 * u8 variant, u64 seed, i64 step, u32 tensor count, then per tensor: u32 length + name,
 * u32 rows, u32 cols, float32 value[rows*cols], adam m, adam v; finally a u64 FNV-1a
 * checksum of every preceding byte.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "motifrep/model/trainer.h"

namespace motifrep {

inline constexpr uint32_t kCheckpointVersion = 1;

std::vector<uint8_t> serialize_checkpoint(const ModelState& state);
/// Throws CheckpointError on a bad magic, version mismatch, truncation, checksum failure
/// or a tensor whose name or shape does not match the stored config.
ModelState deserialize_checkpoint(std::span<const uint8_t> bytes);
/// As above, additionally requiring every tensor to match `expected` (cross-config load).
ModelState deserialize_checkpoint(std::span<const uint8_t> bytes, const ModelConfig& expected);

void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

uint64_t fnv1a(std::span<const uint8_t> bytes);
/// 16 hex digits of the FNV-1a hash of the serialized checkpoint.
std::string checkpoint_hash(const ModelState& state);

}  // namespace motifrep
