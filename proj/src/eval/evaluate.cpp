#include "motifrep/eval/evaluate.h"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "motifrep/error.h"

namespace motifrep {

bool is_match(const GeneratedPair& pair, double threshold) {
  return classify_tokens(pair.input, pair.output, pair.key, threshold).type == pair.requested;
}

double matching_rate(const std::vector<GeneratedPair>& pairs, double threshold) {
  if (pairs.empty()) throw Error("matching rate of an empty pair list");
  long matched = 0;
  for (const auto& p : pairs) matched += is_match(p, threshold) ? 1 : 0;
  return static_cast<double>(matched) / static_cast<double>(pairs.size());
}

double EvalReport::model_branch_mean() const {
  double sum = 0;
  for (auto t : {RepetitionType::SuR, RepetitionType::HoR, RepetitionType::SyR}) {
    sum += scores[static_cast<std::size_t>(class_index(t))].mean;
  }
  return sum / 3.0;
}

int evaluation_transposition(const TokenMatrix& motif) {
  for (int r = 0; r < motif.valid_len; ++r) {
    if (motif.at(r, Attribute::Type) == static_cast<int>(TokenType::Note) && motif.at(r, Attribute::Pitch) - 1 - 2 < 0) {
      return 2;
    }
  }
  return -2;
}

EvalReport evaluate_variant(Variant variant, const RTransformer<float>& model,
                            const std::vector<RepetitionSample>& test_samples, uint64_t seed) {
  if (test_samples.empty()) throw Error("evaluation needs at least one test sample");
  EvalReport report;
  report.variant = variant;
  report.config = model.config();
  GenerateOptions options;
  options.rules = uses_rules(variant);
  std::set<std::pair<std::string, int>> seen;
  for (const auto& s : test_samples) {
    if (!seen.insert({s.song_id, s.bar_a}).second) continue;
    ++report.motifs;
    for (auto type : kTrainableTypes) {
      LabelStep step{type, std::nullopt};
      if (type == RepetitionType::TrR) step.t = evaluation_transposition(s.input);
      Diagnostics diag;
      GeneratedPair pair{s.input, generate_one(s.input, step, &model, options, seed, &diag), type, s.key};
      auto& score = report.scores[static_cast<std::size_t>(class_index(type))];
      ++score.count;
      if (is_match(pair)) ++score.matched;
    }
  }
  for (auto& score : report.scores) {
    score.mean = score.count ? static_cast<double>(score.matched) / static_cast<double>(score.count) : 0.0;
    score.std = std::sqrt(score.mean * (1.0 - score.mean));
  }
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json labels = nlohmann::json::object();
  for (auto type : kTrainableTypes) {
    const auto& s = r.scores[static_cast<std::size_t>(class_index(type))];
    labels[std::string(to_string(type))] = {{"count", s.count}, {"matched", s.matched}, {"mean", s.mean}, {"std", s.std}};
  }
  return nlohmann::json{{"variant", std::string(to_string(r.variant))},
                        {"motifs", r.motifs},
                        {"labels", labels},
                        {"model_branch_mean", r.model_branch_mean()},
                        {"config", to_json(r.config)}};
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%-8s", "variant");
  out << cell;
  for (auto type : kTrainableTypes) {
    std::snprintf(cell, sizeof cell, " %13s", std::string(to_string(type)).c_str());
    out << cell;
  }
  out << '\n';
  for (const auto& r : reports) {
    std::snprintf(cell, sizeof cell, "%-8s", std::string(to_string(r.variant)).c_str());
    out << cell;
    for (const auto& s : r.scores) {
      std::snprintf(cell, sizeof cell, " %6.2f +- %.2f", s.mean, s.std);
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace motifrep
