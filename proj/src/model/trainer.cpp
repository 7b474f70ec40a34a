#include "motifrep/model/trainer.h"

#include <cmath>
#include <numeric>

#include "motifrep/error.h"

namespace motifrep {
namespace {

constexpr uint64_t kDropoutStream = 0x9E3779B97F4A7C15ULL;

template <typename F>
void get_field(const nlohmann::json& j, const char* key, F& field) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(field);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("$.") + key, e.what());
  }
}

}  // namespace

nlohmann::json to_json(const TrainOptions& o) {
  return nlohmann::json{{"batch_size", o.batch_size}, {"max_steps", o.max_steps},     {"window", o.window},
                        {"patience", o.patience},     {"stop_epsilon", o.stop_epsilon}, {"seed", o.seed}};
}

TrainOptions train_options_from_json(const nlohmann::json& j) {
  TrainOptions o;
  get_field(j, "batch_size", o.batch_size);
  get_field(j, "max_steps", o.max_steps);
  get_field(j, "window", o.window);
  get_field(j, "patience", o.patience);
  get_field(j, "stop_epsilon", o.stop_epsilon);
  get_field(j, "seed", o.seed);
  if (o.batch_size < 1) throw SchemaError("$.batch_size", "must be >= 1");
  if (o.max_steps < 0) throw SchemaError("$.max_steps", "must be >= 0");
  if (o.window < 1) throw SchemaError("$.window", "must be >= 1");
  if (o.patience < 1) throw SchemaError("$.patience", "must be >= 1");
  return o;
}

ModelState::ModelState(const ModelConfig& config, Variant v, uint64_t s) : model(config, s), variant(v), seed(s) {
  for (const auto& p : model.parameters()) {
    adam.m.push_back(Mat<float>::Zero(p.value.rows(), p.value.cols()));
    adam.v.push_back(Mat<float>::Zero(p.value.rows(), p.value.cols()));
  }
}

std::vector<TrainingExample> make_examples(const std::vector<RepetitionSample>& samples, Variant variant,
                                           const GammaSchedule& gamma) {
  std::vector<TrainingExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!is_trainable(s.label.type)) throw Error("sample with non-trainable label");
    TrainingExample ex{s.input, s.target, class_index(s.label.type), {}};
    ex.weights = uses_repetition_matrix(variant) ? repetition_matrix(s.target, s.label.type, gamma) : uniform_matrix(s.target);
    out.push_back(std::move(ex));
  }
  return out;
}

Trainer::Trainer(ModelState& state, uint64_t seed) : state_(state), dropout_(seed ^ kDropoutStream) {}

LossRecord Trainer::step(const std::vector<const TrainingExample*>& batch) {
  auto& model = state_.model;
  const ModelConfig& c = model.config();
  model.zero_grad();
  LossRecord rec;
  rec.step = state_.step;
  for (const auto* ex : batch) {
    const auto lv = model.accumulate(Example{&ex->input, &ex->target, ex->label, &ex->weights}, c.lambda, &dropout_);
    rec.classification += lv.classification;
    rec.reconstruction += lv.reconstruction;
    rec.total += lv.total;
  }
  if (!std::isfinite(rec.total)) {
    throw DivergenceError("training diverged at step " + std::to_string(state_.step) + ": total loss " +
                          std::to_string(rec.total) + " (L_c " + std::to_string(rec.classification) + ", L_r " +
                          std::to_string(rec.reconstruction) + ")");
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const float lr = static_cast<float>(c.learning_rate);
  const float b1 = static_cast<float>(c.adam_beta1), b2 = static_cast<float>(c.adam_beta2);
  const float corr1 = static_cast<float>(1.0 - std::pow(c.adam_beta1, t));
  const float corr2 = static_cast<float>(1.0 - std::pow(c.adam_beta2, t));
  const float eps = static_cast<float>(c.adam_epsilon);
  auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state_.adam.m[i];
    auto& v = state_.adam.v[i];
    m = b1 * m + (1 - b1) * p.grad;
    v = b2 * v + (1 - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    if (p.pad_row_pinned) p.value.row(0).setZero();
  }
  return rec;
}

TrainResult train(ModelState& state, const std::vector<RepetitionSample>& samples, const TrainOptions& options,
                  std::ostream* csv, const std::function<void(const LossRecord&)>& progress) {
  if (samples.empty()) throw Error("cannot train on an empty dataset");
  const auto examples = make_examples(samples, state.variant, state.model.config().gamma);
  Trainer trainer(state, options.seed);
  Rng order_rng(options.seed);
  std::vector<std::size_t> order(examples.size());
  std::size_t cursor = order.size();

  if (csv) *csv << "step,L_c,L_r,total\n";
  TrainResult result;
  double window_sum = 0, previous = 0;
  bool have_previous = false;
  int flat = 0;
  for (long s = 0; s < options.max_steps; ++s) {
    std::vector<const TrainingExample*> batch;
    while (static_cast<int>(batch.size()) < options.batch_size) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.next() % i]);
        cursor = 0;
      }
      batch.push_back(&examples[order[cursor++]]);
    }
    const LossRecord rec = trainer.step(batch);
    result.trace.push_back(rec);
    if (csv) *csv << rec.step << ',' << rec.classification << ',' << rec.reconstruction << ',' << rec.total << '\n';
    if (progress) progress(rec);

    window_sum += rec.total;
    if (static_cast<long>(result.trace.size()) % options.window == 0) {
      const double mean = window_sum / options.window;
      window_sum = 0;
      if (have_previous) {
        const double improvement = (previous - mean) / std::abs(previous);
        flat = improvement < options.stop_epsilon ? flat + 1 : 0;
      }
      previous = mean;
      have_previous = true;
      if (flat >= options.patience) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

std::vector<double> window_means(const std::vector<LossRecord>& trace, int window) {
  std::vector<double> out;
  if (window < 1) throw Error("window must be >= 1");
  for (std::size_t start = 0; start + static_cast<std::size_t>(window) <= trace.size(); start += static_cast<std::size_t>(window)) {
    double sum = 0;
    for (std::size_t i = start; i < start + static_cast<std::size_t>(window); ++i) sum += trace[i].total;
    out.push_back(sum / window);
  }
  return out;
}

double classification_accuracy(const RTransformer<float>& model, const std::vector<RepetitionSample>& samples) {
  if (samples.empty()) throw Error("accuracy of an empty sample set");
  long correct = 0;
  for (const auto& s : samples) {
    Eigen::Index arg;
    model.classify(s.input).maxCoeff(&arg);
    if (static_cast<int>(arg) == class_index(s.label.type)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace motifrep
