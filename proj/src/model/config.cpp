#include "motifrep/model/config.h"

#include <numeric>

#include "motifrep/error.h"

namespace motifrep {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::V:
      return "V";
    case Variant::R:
      return "R";
    case Variant::RR:
      return "RR";
  }
  return "";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : {Variant::V, Variant::R, Variant::RR}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

GammaSchedule default_gamma_schedule() {
  GammaSchedule g{};
  for (int c = 0; c < kNumClasses; ++c) {
    auto& row = g[static_cast<std::size_t>(c)];
    row.fill(1.0);
    row[attr(Attribute::Pitch)] = 4.0;
    const auto type = static_cast<RepetitionType>(c);
    if (type == RepetitionType::SuR || type == RepetitionType::HoR || type == RepetitionType::SyR) {
      row[attr(Attribute::Position)] = 2.0;
      row[attr(Attribute::Duration)] = 2.0;
      row[attr(Attribute::Velocity)] = 2.0;
    }
  }
  return g;
}

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.layers = 6;
  c.hidden = 256;
  c.feed_forward = 2048;
  return c;
}

int ModelConfig::embedding_width() const {
  return std::accumulate(attribute_embedding.begin(), attribute_embedding.end(), 0);
}

void ModelConfig::check() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid model config: ") + what);
  };
  require(layers >= 1, "layers must be >= 1");
  require(heads >= 1 && hidden % heads == 0, "hidden must be a positive multiple of heads");
  require(feed_forward >= 1, "feed_forward must be >= 1");
  require(label_embedding >= 1, "label_embedding must be >= 1");
  for (int e : attribute_embedding) require(e >= 1, "attribute embeddings must be >= 1");
  require(max_len >= 1 && max_len <= kMaxRows, "max_len must lie in [1, 120]");
  require(dropout >= 0 && dropout < 1, "dropout must lie in [0, 1)");
  require(lambda >= 0 && lambda <= 1, "lambda must lie in [0, 1]");
  require(learning_rate > 0, "learning_rate must be positive");
  for (const auto& row : gamma) {
    for (double g : row) require(g >= 1.0, "gamma must be >= 1");
  }
}

nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"layers", c.layers},
                        {"heads", c.heads},
                        {"hidden", c.hidden},
                        {"feed_forward", c.feed_forward},
                        {"attribute_embedding", c.attribute_embedding},
                        {"label_embedding", c.label_embedding},
                        {"max_len", c.max_len},
                        {"dropout", c.dropout},
                        {"lambda", c.lambda},
                        {"learning_rate", c.learning_rate},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_epsilon", c.adam_epsilon},
                        {"categorical_decoder", c.categorical_decoder},
                        {"gamma", c.gamma}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("$.") + key, e.what());
    }
  };
  get("layers", c.layers);
  get("heads", c.heads);
  get("hidden", c.hidden);
  get("feed_forward", c.feed_forward);
  get("attribute_embedding", c.attribute_embedding);
  get("label_embedding", c.label_embedding);
  get("max_len", c.max_len);
  get("dropout", c.dropout);
  get("lambda", c.lambda);
  get("learning_rate", c.learning_rate);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("adam_epsilon", c.adam_epsilon);
  get("categorical_decoder", c.categorical_decoder);
  get("gamma", c.gamma);
  c.check();
  return c;
}

}  // namespace motifrep
