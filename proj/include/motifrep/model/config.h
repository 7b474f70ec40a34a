/**
 * @file config.h
 * @brief Model hyperparameters, the per-(label, attribute) importance schedule and
 *        the V/R/RR variant tag.
 */

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "motifrep/core/vocabulary.h"
#include "motifrep/rules/repetition.h"

namespace motifrep {

/// V: no repetition learning matrix, no rule branches. R: matrix only. RR: both.
enum class Variant { V, R, RR };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
/// V trains with an all-ones weight matrix; R and RR train with the frequency-weighted one.
inline bool uses_repetition_matrix(Variant v) { return v != Variant::V; }
inline bool uses_rules(Variant v) { return v == Variant::RR; }

/// Attribute importance gamma per (class, attribute).
using GammaSchedule = std::array<std::array<double, kNumAttributes>, kNumClasses>;

/// Pitch 4 for every class; position/duration/velocity 2 for SuR, HoR and SyR; 1 elsewhere.
GammaSchedule default_gamma_schedule();

struct ModelConfig {
  int layers = 2;
  int heads = 4;
  int hidden = 64;  // H1; the feature dimension H2 equals it
  int feed_forward = 256;
  std::array<int, kNumAttributes> attribute_embedding = {128, 256, 64, 32, 512, 128, 128};
  int label_embedding = 32;
  int max_len = kMaxRows;
  double dropout = 0.1;
  double lambda = 0.5;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool categorical_decoder = false;
  GammaSchedule gamma = default_gamma_schedule();

  /// 6 layers, 256 hidden, 2048 feed-forward.
  static ModelConfig full_scale();

  int embedding_width() const;
  /// Throws Error naming the first violated constraint.
  void check() const;
};

nlohmann::json to_json(const ModelConfig& c);
/// Missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace motifrep
