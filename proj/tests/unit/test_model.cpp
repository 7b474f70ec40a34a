#include <cmath>
#include <random>

#include "doctest.h"
#include "motifrep/error.h"
#include "motifrep/model/gradient_check.h"
#include "motifrep/model/objective.h"
#include "motifrep/model/transformer.h"

using namespace motifrep;

namespace {

constexpr int kPitch = attr(Attribute::Pitch);
constexpr int kChord = attr(Attribute::Chord);

/// Note rows only, one per pitch, so every column is fully controlled.
TokenMatrix note_rows(const std::vector<int>& pitches) {
  TokenMatrix t;
  for (std::size_t i = 0; i < pitches.size(); ++i) {
    t.rows[i] = {30, 1, static_cast<int>(i % 16) + 1, 2, pitches[i] + 1, 2, 20};
  }
  t.valid_len = static_cast<int>(pitches.size());
  return t;
}

TokenMatrix random_tokens(std::mt19937& rng, int valid) {
  TokenMatrix t;
  for (int r = 0; r < valid; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      t.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
          std::uniform_int_distribution<int>(1, kVocabSizes[static_cast<std::size_t>(k)] - 1)(rng);
    }
  }
  t.valid_len = valid;
  return t;
}

ModelConfig tiny_config(bool categorical = false) {
  ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.hidden = 16;
  c.feed_forward = 24;
  c.attribute_embedding = {4, 4, 4, 2, 6, 4, 4};
  c.label_embedding = 4;
  c.max_len = 8;
  c.categorical_decoder = categorical;
  return c;
}

/// Reference cross-entropy of softmax(logits) evaluated independently of the library.
double reference_ce(const std::vector<double>& logits, int y) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double s = 0;
  for (double v : logits) s += std::exp(v - mx);
  return -(logits[static_cast<std::size_t>(y)] - mx - std::log(s));
}

}  // namespace

TEST_CASE("repetition matrix worked values") {
  const int C3 = 48, D3 = 50, E3 = 52;
  const TokenMatrix t = note_rows({C3, D3, C3, E3, C3});
  const auto a = repetition_matrix(t, RepetitionType::SuR);
  const double expected[] = {6.4, 4.8, 6.4, 4.8, 6.4};
  for (int l = 0; l < 5; ++l) CHECK(a.at(l, kPitch) == doctest::Approx(expected[l]).epsilon(1e-12));
  // constant columns: tempo (gamma 1), velocity (gamma 2 for SuR)
  for (int l = 0; l < 5; ++l) {
    CHECK(a.at(l, attr(Attribute::Tempo)) == doctest::Approx(2.0));
    CHECK(a.at(l, attr(Attribute::Velocity)) == doctest::Approx(4.0));
  }
  for (int l = 5; l < kMaxRows; ++l) CHECK(a.at(l, kPitch) == 0.0);
}

TEST_CASE("repetition matrix all-distinct column") {
  TokenMatrix t = note_rows({60, 61, 62, 63});
  for (int l = 0; l < 4; ++l) t.rows[static_cast<std::size_t>(l)][kChord] = 2 + l;
  const auto a = repetition_matrix(t, RepetitionType::StR);
  for (int l = 0; l < 4; ++l) CHECK(a.at(l, kChord) == doctest::Approx(1.25));
}

TEST_CASE("repetition matrix gamma schedule") {
  const auto g = default_gamma_schedule();
  for (auto type : kTrainableTypes) {
    const auto& row = g[static_cast<std::size_t>(class_index(type))];
    CHECK(row[kPitch] == 4.0);
    const bool structural = type == RepetitionType::SuR || type == RepetitionType::HoR || type == RepetitionType::SyR;
    for (auto at : {Attribute::Position, Attribute::Duration, Attribute::Velocity}) CHECK(row[attr(at)] == (structural ? 2.0 : 1.0));
    for (auto at : {Attribute::Tempo, Attribute::Chord, Attribute::Type}) CHECK(row[attr(at)] == 1.0);
  }
}

TEST_CASE("repetition matrix bounds property") {
  std::mt19937 rng(3);
  const auto g = default_gamma_schedule();
  for (int trial = 0; trial < 200; ++trial) {
    TokenMatrix t = random_tokens(rng, std::uniform_int_distribution<int>(1, kMaxRows)(rng));
    // shrink alphabets so repeats occur
    for (int r = 0; r < t.valid_len; ++r)
      for (auto& v : t.rows[static_cast<std::size_t>(r)]) v = 1 + v % 3;
    const auto type = kTrainableTypes[static_cast<std::size_t>(trial % kNumClasses)];
    const auto a = repetition_matrix(t, type);
    for (int l = 0; l < kMaxRows; ++l) {
      for (int k = 0; k < kNumAttributes; ++k) {
        const double gk = g[static_cast<std::size_t>(class_index(type))][static_cast<std::size_t>(k)];
        if (l < t.valid_len) {
          CHECK(a.at(l, k) > gk);
          CHECK(a.at(l, k) <= 2 * gk + 1e-12);
        } else {
          CHECK(a.at(l, k) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("uniform matrix is ones on valid rows") {
  const auto a = uniform_matrix(note_rows({60, 62}));
  CHECK(a.at(0, 0) == 1.0);
  CHECK(a.at(1, 6) == 1.0);
  CHECK(a.at(2, 0) == 0.0);
}

TEST_CASE("classification loss values") {
  RowVec<double> one_hot = RowVec<double>::Zero(5);
  one_hot(2) = 1;
  CHECK(loss_classification<double>(one_hot, 2) == 0.0);
  const RowVec<double> uniform = RowVec<double>::Constant(5, 0.2);
  CHECK(loss_classification<double>(uniform, 0) == doctest::Approx(1.6094).epsilon(1e-4));
}

TEST_CASE("classification loss gradient through softmax matches finite differences") {
  std::mt19937 rng(5);
  std::normal_distribution<double> n(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> z(5);
    for (auto& v : z) v = n(rng);
    const int y = trial % 5;
    RowVec<double> logits(5);
    for (int i = 0; i < 5; ++i) logits(i) = z[static_cast<std::size_t>(i)];
    const RowVec<double> p = softmax<double>(logits);
    CHECK(loss_classification<double>(p, y) == doctest::Approx(reference_ce(z, y)).epsilon(1e-12));
    for (int i = 0; i < 5; ++i) {
      const double analytic = p(i) - (i == y ? 1.0 : 0.0);
      auto zp = z, zm = z;
      zp[static_cast<std::size_t>(i)] += 1e-5;
      zm[static_cast<std::size_t>(i)] -= 1e-5;
      const double numeric = (reference_ce(zp, y) - reference_ce(zm, y)) / 2e-5;
      CHECK(std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8}) < 1e-4);
    }
  }
}

TEST_CASE("reconstruction loss values") {
  const TokenMatrix t = note_rows({60, 62, 64});
  const auto ones = uniform_matrix(t);
  Mat<double> pred(3, kNumAttributes);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < kNumAttributes; ++k) pred(l, k) = t.rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
  CHECK(loss_reconstruction<double>(pred, t, ones) == 0.0);
  pred(1, kPitch) += 2;
  CHECK(loss_reconstruction<double>(pred, t, ones) == doctest::Approx(4.0));
  RepetitionLearningMatrix doubled = ones;
  for (auto& row : doubled.weights)
    for (auto& v : row) v *= 2;
  pred(2, 0) -= 0.7;
  const double base = loss_reconstruction<double>(pred, t, ones);
  CHECK(loss_reconstruction<double>(pred, t, doubled) == doctest::Approx(4 * base).epsilon(1e-12));
}

TEST_CASE("total loss endpoints") {
  CHECK(total_loss<double>(1.5, 7.0, 1.0) == 1.5);
  CHECK(total_loss<double>(1.5, 7.0, 0.0) == 7.0);
  CHECK(total_loss<double>(1.5, 7.0, 0.5) == doctest::Approx(4.25));
}

TEST_CASE("model shapes and vocabulary errors") {
  RTransformer<double> m(tiny_config(), 1);
  const TokenMatrix x = note_rows({60, 62, 64});
  CHECK(m.embed(x, 8).rows() == 8);
  CHECK(m.embed(x, 8).cols() == 16);
  CHECK(m.encode(x, 5).rows() == 5);
  CHECK(m.decode(x, 0, 3).rows() == 3);
  CHECK(m.decode(x, 0, 3).cols() == kNumAttributes);
  const auto p = m.classify(x);
  CHECK(p.size() == kNumClasses);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  TokenMatrix bad = x;
  bad.rows[1][kPitch] = 200;
  CHECK_THROWS_AS(m.classify(bad), VocabularyError);
  CHECK_THROWS_AS(m.classify(TokenMatrix{}), Error);
}

TEST_CASE("pad rows embed to a constant vector and embedding is row-local") {
  RTransformer<double> m(tiny_config(), 2);
  TokenMatrix x = note_rows({60, 62, 64});
  const Mat<double> e = m.embed(x, 6);
  CHECK((e.row(3) - e.row(5)).norm() == 0.0);
  CHECK((e.row(3) - m.find("emb.proj.b")->value.row(0)).norm() == 0.0);
  TokenMatrix y = x;
  y.rows[1][kPitch] = 70;
  const Mat<double> f = m.embed(y, 6);
  CHECK((e.row(0) - f.row(0)).norm() == 0.0);
  CHECK((e.row(1) - f.row(1)).norm() > 0.0);
  CHECK((e.bottomRows(4) - f.bottomRows(4)).norm() == 0.0);
}

TEST_CASE("pad invariance of encoder, classifier and decoder") {
  std::mt19937 rng(9);
  ModelConfig c = tiny_config();
  c.max_len = 40;
  RTransformer<double> m(c, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const int valid = std::uniform_int_distribution<int>(1, 12)(rng);
    const TokenMatrix x = random_tokens(rng, valid);
    const Mat<double> short_enc = m.encode(x, valid);
    const Mat<double> long_enc = m.encode(x, 40);
    CHECK((short_enc - long_enc.topRows(valid)).cwiseAbs().maxCoeff() == 0.0);
    const Mat<double> d1 = m.decode(x, 2, valid);
    const Mat<double> d2 = m.decode(x, 2, 40);
    CHECK((d1 - d2.topRows(valid)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single-row input and evaluation determinism") {
  RTransformer<float> m(tiny_config(), 4);
  const TokenMatrix x = note_rows({60});
  const auto a = m.classify(x);
  const auto b = m.classify(x);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(a.sum() == doctest::Approx(1.0).epsilon(1e-6));
  RTransformer<float> again(tiny_config(), 4);
  CHECK((again.decode(x, 1, 1) - m.decode(x, 1, 1)).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("changing the label changes the decoder output") {
  RTransformer<double> m(tiny_config(), 5);
  const TokenMatrix x = note_rows({60, 64, 67});
  for (int y = 1; y < kNumClasses; ++y) CHECK((m.decode(x, 0, 3) - m.decode(x, y, 3)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("head independence and lambda endpoints") {
  RTransformer<double> m(tiny_config(), 6);
  const TokenMatrix x = note_rows({60, 64, 67});
  const TokenMatrix tgt = note_rows({62, 65, 69, 71});
  const auto a = repetition_matrix(tgt, RepetitionType::HoR);
  const Example ex{&x, &tgt, class_index(RepetitionType::HoR), &a};

  // Only the pitch entries of the weight matrix are non-zero: other heads get no gradient.
  RepetitionLearningMatrix pitch_only;
  pitch_only.valid_len = a.valid_len;
  for (int l = 0; l < a.valid_len; ++l) pitch_only.weights[static_cast<std::size_t>(l)][kPitch] = a.at(l, kPitch);
  m.zero_grad();
  m.accumulate(Example{&x, &tgt, ex.label, &pitch_only}, 0.0, nullptr);
  for (const auto& p : m.parameters()) {
    if (p.name.rfind("dec.head.", 0) != 0) continue;
    const bool is_pitch = p.name.find(".pitch.") != std::string::npos;
    CHECK_MESSAGE((p.grad.norm() > 0) == is_pitch, p.name);
  }

  m.zero_grad();
  auto lv = m.accumulate(ex, 1.0, nullptr);
  CHECK(lv.total == doctest::Approx(lv.classification));
  for (const auto& p : m.parameters())
    if (p.group == ParamGroup::Decoder) CHECK_MESSAGE(p.grad.norm() == 0.0, p.name);

  m.zero_grad();
  lv = m.accumulate(ex, 0.0, nullptr);
  CHECK(lv.total == doctest::Approx(lv.reconstruction));
  for (const auto& p : m.parameters())
    if (p.group == ParamGroup::Label) CHECK_MESSAGE(p.grad.norm() == 0.0, p.name);

  // the loss terms match the standalone objective functions
  const Mat<double> pred = m.decode(x, ex.label, 4);
  CHECK(lv.reconstruction == doctest::Approx(loss_reconstruction<double>(pred, tgt, a)).epsilon(1e-12));
  CHECK(lv.classification == doctest::Approx(loss_classification<double>(m.classify(x), ex.label)).epsilon(1e-12));
}

TEST_CASE("pad embedding rows receive no gradient") {
  RTransformer<double> m(tiny_config(), 7);
  const TokenMatrix x = note_rows({60, 64});
  const TokenMatrix tgt = note_rows({60, 64, 67});
  const auto a = repetition_matrix(tgt, RepetitionType::SuR);
  m.zero_grad();
  m.accumulate(Example{&x, &tgt, 2, &a}, 0.5, nullptr);
  for (const auto& p : m.parameters()) {
    if (p.group == ParamGroup::Embedding && p.name.find("proj") == std::string::npos) {
      CHECK(p.value.row(0).norm() == 0.0);
      CHECK(p.grad.row(0).norm() == 0.0);
    }
  }
}

TEST_CASE("backward pass matches finite differences") {
  for (bool categorical : {false, true}) {
    CAPTURE(categorical);
    RTransformer<double> m(tiny_config(categorical), 11);
    std::mt19937 rng(13);
    const TokenMatrix x = random_tokens(rng, 5);
    const TokenMatrix tgt = random_tokens(rng, 7);
    const auto a = repetition_matrix(tgt, RepetitionType::SyR);
    const auto r = gradient_check(m, Example{&x, &tgt, 4, &a}, 0.5);
    for (const auto& t : r.tensors) CHECK_MESSAGE(t.relative_error < 1e-4, t.name << " " << t.relative_error);
    CHECK(r.end_to_end < 1e-3);
  }
}

TEST_CASE("dropout changes training loss but not evaluation") {
  ModelConfig c = tiny_config();
  c.dropout = 0.5;
  RTransformer<double> m(c, 12);
  const TokenMatrix x = note_rows({60, 64, 67});
  const auto a = repetition_matrix(x, RepetitionType::StR);
  const Example ex{&x, &x, 0, &a};
  Rng r1(1), r2(1);
  const double l1 = m.accumulate(ex, 0.5, &r1).total;
  const double l2 = m.accumulate(ex, 0.5, &r2).total;
  CHECK(l1 == l2);
  CHECK(m.loss(ex, 0.5).total != l1);
  CHECK(m.loss(ex, 0.5).total == m.loss(ex, 0.5).total);
}

TEST_CASE("cast preserves parameters") {
  RTransformer<float> f(tiny_config(), 14);
  const auto d = f.cast<double>();
  for (std::size_t i = 0; i < f.parameters().size(); ++i)
    CHECK((d.parameters()[i].value.cast<float>() - f.parameters()[i].value).norm() == 0.0f);
}

TEST_CASE("rng draws are reproducible and in range") {
  Rng a(42), b(42);
  double mean = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += a.normal();
    b.normal();
  }
  CHECK(std::abs(mean / 10000) < 0.05);
}
