/**
 * @file trainer.h
 * @brief Model state, Adam optimization of the joint classification/reconstruction loss,
 *        and the plateau stopping rule.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "motifrep/data/dataset.h"
#include "motifrep/model/transformer.h"

namespace motifrep {

struct TrainOptions {
  int batch_size = 16;
  long max_steps = 3000;
  int window = 200;        // steps per loss window
  int patience = 3;        // consecutive flat windows before stopping
  double stop_epsilon = 1e-3;
  uint64_t seed = 1;
};

nlohmann::json to_json(const TrainOptions& o);
/// Missing keys keep their defaults; type errors raise SchemaError.
TrainOptions train_options_from_json(const nlohmann::json& j);

struct AdamMoments {
  std::vector<Mat<float>> m;
  std::vector<Mat<float>> v;
};

struct ModelState {
  ModelState(const ModelConfig& config, Variant variant, uint64_t seed);

  RTransformer<float> model;
  Variant variant;
  uint64_t seed;
  long step = 0;
  AdamMoments adam;
};

/// One training pair with its precomputed loss weights.
struct TrainingExample {
  TokenMatrix input;
  TokenMatrix target;
  int label = 0;
  RepetitionLearningMatrix weights;
};

/// V weights every valid target entry by 1; R and RR use the repetition learning matrix of the target.
std::vector<TrainingExample> make_examples(const std::vector<RepetitionSample>& samples, Variant variant,
                                           const GammaSchedule& gamma);

struct LossRecord {
  long step = 0;
  double classification = 0;
  double reconstruction = 0;
  double total = 0;
};

/// Adam over summed per-example gradients.
class Trainer {
 public:
  Trainer(ModelState& state, uint64_t seed);
  /// Forward/backward over `batch` (dropout on) and one Adam update. Returns the batch loss
  /// before the update. Throws DivergenceError on a non-finite loss.
  LossRecord step(const std::vector<const TrainingExample*>& batch);

 private:
  ModelState& state_;
  Rng dropout_;
};

struct TrainResult {
  std::vector<LossRecord> trace;
  bool converged = false;  // stopped by the plateau rule rather than max_steps
};

/// Epoch-shuffled mini-batches until the plateau rule fires or max_steps. Each step's losses
/// are appended to `csv` (header "step,L_c,L_r,total") when given.
TrainResult train(ModelState& state, const std::vector<RepetitionSample>& samples, const TrainOptions& options,
                  std::ostream* csv = nullptr, const std::function<void(const LossRecord&)>& progress = {});

/// Mean total loss of consecutive full windows.
std::vector<double> window_means(const std::vector<LossRecord>& trace, int window);

/// Fraction of samples whose argmax class probability equals the label.
double classification_accuracy(const RTransformer<float>& model, const std::vector<RepetitionSample>& samples);

}  // namespace motifrep
