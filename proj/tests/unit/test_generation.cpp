#include <random>

#include "doctest.h"
#include "motifrep/core/midi.h"
#include "motifrep/core/segment.h"
#include "motifrep/core/tokenizer.h"
#include "motifrep/data/synthetic.h"
#include "motifrep/error.h"
#include "motifrep/eval/evaluate.h"
#include "motifrep/gen/generator.h"

using namespace motifrep;

namespace {

constexpr int C4 = 60, D4 = 62, Eb4 = 63, E4 = 64, Fs4 = 66, G4 = 67, A4 = 69;

TokenMatrix line(const std::vector<int>& pitches) { return tokenize(make_line_motif(pitches)); }

std::vector<int> pitches_of(const TokenMatrix& t) { return detokenize(t).pitches(); }

std::vector<int> shifted(std::vector<int> p, int t) {
  for (int& x : p) x += t;
  return p;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.hidden = 16;
  c.feed_forward = 24;
  c.attribute_embedding = {4, 4, 4, 2, 6, 4, 4};
  c.label_embedding = 4;
  return c;
}

const RTransformer<float>& tiny_model() {
  static const RTransformer<float> m(tiny_config(), 11);
  return m;
}

GenerationRequest request(const TokenMatrix& motif, const std::string& labels, uint64_t seed = 0) {
  GenerationRequest r;
  r.motif = motif;
  r.labels = parse_label_list(labels);
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("label step parsing") {
  CHECK(parse_label_step("StR") == LabelStep{RepetitionType::StR, std::nullopt});
  CHECK(parse_label_step("TrR:-2") == LabelStep{RepetitionType::TrR, -2});
  CHECK(parse_label_step("TrR:+5") == LabelStep{RepetitionType::TrR, 5});
  CHECK(parse_label_step("TrR") == LabelStep{RepetitionType::TrR, std::nullopt});
  CHECK_THROWS_AS(parse_label_step("XyZ"), Error);
  CHECK_THROWS_AS(parse_label_step("TrR:x"), Error);
  const auto list = parse_label_list("StR,TrR:-2,SyR");
  REQUIRE(list.size() == 3);
  CHECK(list[2].type == RepetitionType::SyR);
  for (const auto& s : list) CHECK(parse_label_step(to_string(s)) == s);
}

TEST_CASE("request validity") {
  const TokenMatrix m = line({C4, E4});
  CHECK_NOTHROW(check_request(request(m, "StR,TrR:24,TrR:-24")));
  CHECK_THROWS_AS(check_request(request(m, "TrR:0")), ValidityError);
  CHECK_THROWS_AS(check_request(request(m, "TrR:25")), ValidityError);
  GenerationRequest bad = request(m, "StR");
  bad.labels[0].t = 2;
  CHECK_THROWS_AS(check_request(bad), ValidityError);
  bad.labels.clear();
  CHECK_THROWS_AS(check_request(bad), ValidityError);
  CHECK_THROWS_AS(parse_label_list("StR:2"), Error);
  CHECK_THROWS_AS(parse_label_list(""), Error);
  CHECK_THROWS_AS(check_request(request(TokenMatrix{}, "StR")), ValidityError);
}

TEST_CASE("StR of the fate motif is a verified exact repetition") {
  const TokenMatrix fate = line({G4, G4, G4, Eb4});
  const Piece piece = generate_piece(request(fate, "StR"), nullptr, GenerateOptions{});
  REQUIRE(piece.motifs.size() == 2);
  CHECK(piece.motifs[1].tokens == fate);
  REQUIRE(piece.motifs[1].verified);
  CHECK(piece.motifs[1].verified->type == RepetitionType::StR);
}

TEST_CASE("TrR +2 shifts every pitch by two semitones") {
  const TokenMatrix out =
      generate_one(line({C4, E4, G4}), LabelStep{RepetitionType::TrR, 2}, nullptr, GenerateOptions{}, 0);
  CHECK(pitches_of(out) == std::vector<int>{D4, Fs4, A4});
}

TEST_CASE("chained and unchained transpositions") {
  const TokenMatrix m = line({C4, E4, G4});
  GenerationRequest req = request(m, "TrR:-2,TrR:-2");
  const Piece chained = generate_piece(req, nullptr, GenerateOptions{});
  CHECK(pitches_of(chained.motifs[2].tokens) == shifted({C4, E4, G4}, -4));
  req.chaining = false;
  const Piece flat = generate_piece(req, nullptr, GenerateOptions{});
  CHECK(pitches_of(flat.motifs[2].tokens) == shifted({C4, E4, G4}, -2));
}

TEST_CASE("four labels give five motifs") {
  const Piece piece = generate_piece(request(line({C4, D4, E4}), "StR,TrR:-2,StR,TrR:3"), nullptr, GenerateOptions{});
  CHECK(piece.motifs.size() == 5);
  CHECK(!piece.motifs[0].requested);
  for (std::size_t i = 1; i < piece.motifs.size(); ++i) {
    REQUIRE(piece.motifs[i].verified);
    CHECK(piece.motifs[i].verified->type == piece.motifs[i].requested->type);
  }
}

TEST_CASE("model branches need a model") {
  const TokenMatrix m = line({C4, E4});
  CHECK_THROWS_AS(generate_one(m, LabelStep{RepetitionType::SyR, {}}, nullptr, GenerateOptions{}, 0), Error);
  CHECK_THROWS_AS(generate_one(m, LabelStep{RepetitionType::TrR, {}}, nullptr, GenerateOptions{}, 0), Error);
  CHECK(pitches_of(generate_one(m, LabelStep{RepetitionType::TrR, {}}, &tiny_model(), GenerateOptions{}, 0)) ==
        shifted({C4, E4}, kDefaultTransposition));
}

TEST_CASE("model-decoded motifs are valid and seed-deterministic") {
  const TokenMatrix m = line({C4, E4, G4, E4});
  for (RepetitionType type : kTrainableTypes) {
    GenerateOptions options;
    options.rules = false;
    options.temperature = 0.5;
    const LabelStep step{type, std::nullopt};
    const TokenMatrix a = generate_one(m, step, &tiny_model(), options, 3);
    const TokenMatrix b = generate_one(m, step, &tiny_model(), options, 3);
    CHECK_NOTHROW(validate(a));
    CHECK(a == b);
    CHECK(a.valid_len == m.valid_len);
  }
}

TEST_CASE("rule branches keep structure and the input's other columns when copying") {
  const TokenMatrix m = line({C4, E4, G4});
  GenerateOptions options;
  options.copy_columns = true;
  const TokenMatrix out = generate_one(m, LabelStep{RepetitionType::TrR, 5}, &tiny_model(), options, 0);
  for (int r = 0; r < m.valid_len; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const int delta = k == static_cast<int>(Attribute::Pitch) && m.rows[r][k] != kPad ? 5 : 0;
      CHECK(out.rows[r][k] == m.rows[r][k] + delta);
    }
  }
}

TEST_CASE("pitch clamping is reported") {
  Diagnostics diag;
  const TokenMatrix out =
      generate_one(line({120, 125}), LabelStep{RepetitionType::TrR, 5}, nullptr, GenerateOptions{}, 0, &diag);
  CHECK(!diag.empty());
  CHECK(pitches_of(out) == std::vector<int>{125, 127});
}

TEST_CASE("discretize always yields valid tokens") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> value(-20.0f, 150.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 20;
    Mat<float> decoded(n, kNumAttributes);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < kNumAttributes; ++k) decoded(i, k) = value(rng);
    }
    const TokenMatrix t = discretize(decoded, n);
    CHECK(t.valid_len == n);
    CHECK_NOTHROW(validate(t));
  }
}

TEST_CASE("rendered MIDI round-trips bar by bar") {
  const Piece piece = generate_piece(request(line({G4, G4, G4, Eb4}), "StR,TrR:-2,TrR:7"), nullptr, GenerateOptions{});
  const NoteSequence seq = parse_midi(render_midi(piece));
  const auto bars = segment_bars(quantize(seq));
  REQUIRE(bars.size() == piece.motifs.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    CHECK(bars[i].pitches() == pitches_of(piece.motifs[i].tokens));
  }
  CHECK_THROWS_AS(render_piece(Piece{}), Error);
}

TEST_CASE("request JSON round trip and errors") {
  GenerationRequest req = request(line({C4, E4}), "StR,TrR:-3,SyR", 42);
  req.chaining = false;
  const GenerationRequest back = request_from_json(request_to_json(req));
  CHECK(back.motif == req.motif);
  CHECK(back.labels == req.labels);
  CHECK(back.seed == 42);
  CHECK(!back.chaining);

  nlohmann::json j = request_to_json(req);
  j["labels"][1] = "XyZ";
  CHECK_THROWS_AS(request_from_json(j), ValidityError);
  j = request_to_json(req);
  j["seed"] = "many";
  try {
    request_from_json(j);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path() == "$.seed");
  }
}

TEST_CASE("matching rate") {
  const TokenMatrix m = line({C4, E4, G4});
  const TokenMatrix other = line({C4, C4, C4, C4, C4, C4});
  const Key key{0, Mode::Major};
  std::vector<GeneratedPair> pairs;
  for (int i = 0; i < 100; ++i) pairs.push_back({m, i < 75 ? m : other, RepetitionType::StR, key});
  CHECK(matching_rate(pairs) == doctest::Approx(0.75));
  CHECK_THROWS_AS(matching_rate({}), Error);
  CHECK(is_match(pairs.front()));
  CHECK(!is_match(pairs.back()));
}

TEST_CASE("evaluation transposition avoids negative pitches") {
  CHECK(evaluation_transposition(line({C4, E4})) == -2);
  CHECK(evaluation_transposition(line({1, 5})) == 2);
}

TEST_CASE("RR evaluation scores the rule branches at 1") {
  const auto samples = build_dataset(synthetic_corpus({4, 2, 0.5}), DatasetConfig{});
  const EvalReport rr = evaluate_variant(Variant::RR, tiny_model(), samples, 0);
  const auto str = static_cast<int>(RepetitionType::StR);
  const auto trr = static_cast<int>(RepetitionType::TrR);
  CHECK(rr.motifs == 20);
  CHECK(rr.scores[str].count == 20);
  CHECK(rr.scores[str].mean == 1.0);
  CHECK(rr.scores[str].std == 0.0);
  CHECK(rr.scores[trr].mean == 1.0);
  const EvalReport again = evaluate_variant(Variant::RR, tiny_model(), samples, 0);
  CHECK(to_json(again) == to_json(rr));
  CHECK(format_report_table({rr}).find("RR") != std::string::npos);
}

TEST_CASE("chaining skips a source without notes") {
  // Pin the type head so every decoded row is a metric row: model branches yield no notes.
  RTransformer<float> model(tiny_config(), 11);
  Parameter<float>* w = model.find("dec.head.type.w");
  Parameter<float>* b = model.find("dec.head.type.b");
  REQUIRE(w);
  REQUIRE(b);
  w->value.setZero();
  b->value.setConstant(static_cast<float>((1.0 - head_center(attr(Attribute::Type))) / head_half_range(attr(Attribute::Type))));

  Diagnostics diag;
  const Piece piece = generate_piece(request(line({C4, E4, G4}), "SuR,TrR:2"), &model, GenerateOptions{}, &diag);
  REQUIRE(piece.motifs.size() == 3);
  CHECK(detokenize(piece.motifs[1].tokens).notes.empty());
  CHECK(piece.motifs[2].source == 0);
  CHECK(pitches_of(piece.motifs[2].tokens) == shifted({C4, E4, G4}, 2));
  CHECK(!diag.empty());
}
