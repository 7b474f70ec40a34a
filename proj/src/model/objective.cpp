#include "motifrep/model/objective.h"

#include <map>

namespace motifrep {

RepetitionLearningMatrix repetition_matrix(const TokenMatrix& tokens, RepetitionType label,
                                           const GammaSchedule& gamma) {
  RepetitionLearningMatrix a;
  a.valid_len = tokens.valid_len;
  if (tokens.valid_len == 0) return a;
  const auto& g = gamma[static_cast<std::size_t>(class_index(label))];
  for (int k = 0; k < kNumAttributes; ++k) {
    std::map<int, int> counts;
    for (int l = 0; l < tokens.valid_len; ++l) ++counts[tokens.rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]];
    for (int l = 0; l < tokens.valid_len; ++l) {
      const double omega = static_cast<double>(counts[tokens.rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]]) /
                           static_cast<double>(tokens.valid_len);
      a.weights[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = g[static_cast<std::size_t>(k)] * (1.0 + omega);
    }
  }
  return a;
}

RepetitionLearningMatrix uniform_matrix(const TokenMatrix& tokens) {
  RepetitionLearningMatrix a;
  a.valid_len = tokens.valid_len;
  for (int l = 0; l < tokens.valid_len; ++l) a.weights[static_cast<std::size_t>(l)].fill(1.0);
  return a;
}

}  // namespace motifrep
