/**
 * @file evaluate.h
 * @brief Matching-rate evaluation of generated repetitions and the V/R/RR comparison.
 */

#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "motifrep/data/dataset.h"
#include "motifrep/gen/generator.h"
#include "motifrep/model/config.h"

namespace motifrep {

/// A generated motif scored against the label it was requested under.
struct GeneratedPair {
  TokenMatrix input;
  TokenMatrix output;
  RepetitionType requested = RepetitionType::StR;
  Key key;
};

/// classify(input, output) has the requested type.
bool is_match(const GeneratedPair& pair, double threshold = kSimilarityThreshold);

/// Matched pairs over all pairs. Throws on an empty list.
double matching_rate(const std::vector<GeneratedPair>& pairs, double threshold = kSimilarityThreshold);

struct LabelScore {
  long count = 0;
  long matched = 0;
  double mean = 0;
  double std = 0;  // population std of the 0/1 match indicators
};

struct EvalReport {
  Variant variant = Variant::RR;
  long motifs = 0;
  std::array<LabelScore, kNumClasses> scores{};
  ModelConfig config;
  /// Mean matching rate over SuR, HoR and SyR.
  double model_branch_mean() const;
};

/// TrR transposition used for an input: -2, or +2 when -2 would push a pitch below 0.
int evaluation_transposition(const TokenMatrix& motif);

/// Generates every label from each distinct test input motif and scores the matches.
/// RR enables the rule branches; V and R decode every label with the model.
EvalReport evaluate_variant(Variant variant, const RTransformer<float>& model,
                            const std::vector<RepetitionSample>& test_samples, uint64_t seed = 0);

nlohmann::json to_json(const EvalReport& r);
/// Aligned table with one row per variant and a "mean +- std" cell per label.
std::string format_report_table(const std::vector<EvalReport>& reports);

}  // namespace motifrep
