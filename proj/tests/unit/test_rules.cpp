#include <cmath>
#include <random>

#include "doctest.h"
#include "motifrep/core/segment.h"
#include "motifrep/error.h"
#include "motifrep/rules/repetition.h"

using namespace motifrep;

namespace {

constexpr int A3 = 57, C4 = 60, D4 = 62, Eb4 = 63, E4 = 64, F4 = 65, Fs4 = 66, G4 = 67, Ab4 = 68, A4 = 69,
              B4 = 71, C5 = 72;
const Key kCMajor{0, Mode::Major};
const Key kCMinor{0, Mode::Minor};

Motif line(std::vector<int> pitches) { return make_line_motif(pitches); }

DevSequence dev(std::vector<int> melody) { return development(melody); }

using D = Direction;

Motif random_motif(std::mt19937& rng, bool polyphonic) {
  std::uniform_int_distribution<int> count(1, 6), pitch(55, 79), slot(0, 15);
  Motif m;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int s = polyphonic ? slot(rng) : i;
    m.notes.push_back(Note{pitch(rng), 120LL * s, 120, 80});
  }
  m.sort();
  return m;
}

Motif shifted(const Motif& m, int t) {
  Motif out = m;
  for (auto& n : out.notes) n.pitch += t;
  return out;
}

}  // namespace

TEST_CASE("development directions") {
  CHECK(dev({E4, D4, E4, G4}) == DevSequence{D::Down, D::Up, D::Up});
  CHECK(dev({C4, C4}) == DevSequence{D::Same});
  CHECK(dev({G4}).empty());
  CHECK(dev({}).empty());
  CHECK(to_string(dev({E4, D4, E4, G4})) == "DUU");
}

TEST_CASE("development is transposition-invariant") {
  std::mt19937 rng(1);
  for (int i = 0; i < 200; ++i) {
    Motif m = random_motif(rng, true);
    const int t = std::uniform_int_distribution<int>(-12, 12)(rng);
    CHECK(development(extract_melody(shifted(m, t))) == development(extract_melody(m)));
  }
}

TEST_CASE("mirror constructions realize the symmetry algebra") {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> pitch(50, 80), len(2, 8);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> m(static_cast<std::size_t>(len(rng)));
    for (auto& p : m) p = pitch(rng);
    const int n = static_cast<int>(m.size());
    std::vector<int> inverted(m.size()), retro_inverted(m.size()), retro(m.size());
    for (int j = 0; j < n; ++j) {
      inverted[static_cast<std::size_t>(j)] = 130 - m[static_cast<std::size_t>(j)];
      retro_inverted[static_cast<std::size_t>(j)] = 130 - m[static_cast<std::size_t>(n - 1 - j)];
      retro[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(n - 1 - j)];
    }
    const DevSequence d = development(m);
    CHECK(development(inverted) == negate(d));
    CHECK(development(retro_inverted) == reversed(d));
    CHECK(development(retro) == negate(reversed(d)));
  }
}

TEST_CASE("keys and scale degrees") {
  CHECK(kCMinor.scale() == std::array<int, 7>{0, 2, 3, 5, 7, 8, 10});
  CHECK(Key{7, Mode::Major}.scale() == std::array<int, 7>{7, 9, 11, 0, 2, 4, 6});
  CHECK(kCMajor.degree(C4) == 35);
  CHECK(kCMajor.degree(B4) == 41);
  CHECK(kCMajor.degree(C5) == 42);
  CHECK(kCMajor.degree(59) == 34);
  CHECK_FALSE(kCMajor.degree(Fs4).has_value());
  CHECK(parse_key("Eb minor") == Key{3, Mode::Minor});
  CHECK_FALSE(parse_key("H major").has_value());
}

TEST_CASE("infer_key") {
  // C-major scale tones ending on C
  Motif scale = line({C4, D4, E4, F4, G4, A4, B4, C5});
  CHECK(infer_key(std::span<const Note>(scale.notes)) == kCMajor);

  // Opening pitch content of the fate motif: G G G Eb | F F F D | Ab Ab Ab G | Eb Eb Eb C,
  // eighth notes with a half-note last tone per bar.
  std::vector<Note> fate;
  const std::vector<std::vector<int>> bars = {{G4, G4, G4, Eb4}, {F4, F4, F4, D4}, {Ab4, Ab4, Ab4, G4}, {Eb4, Eb4, Eb4, C4}};
  for (std::size_t b = 0; b < bars.size(); ++b) {
    for (std::size_t i = 0; i < 4; ++i) {
      fate.push_back(Note{bars[b][i], static_cast<int64_t>(1920 * b + 240 * i), i == 3 ? 960 : 240, 90});
    }
  }
  // Oracle: exhaustive 24-key profile scoring written out independently.
  const double major[12] = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
  const double minor[12] = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17};
  double hist[12] = {};
  for (const auto& n : fate) hist[n.pitch % 12] += static_cast<double>(n.duration);
  double best = -2;
  Key best_key;
  for (int t = 0; t < 12; ++t) {
    for (int m = 0; m < 2; ++m) {
      const double* prof = m == 0 ? major : minor;
      double hx = 0, px = 0;
      for (int i = 0; i < 12; ++i) hx += hist[i] / 12, px += prof[i] / 12;
      double num = 0, dh = 0, dp = 0;
      for (int i = 0; i < 12; ++i) {
        const double a = hist[i] - hx, b = prof[(i - t + 12) % 12] - px;
        num += a * b, dh += a * a, dp += b * b;
      }
      const double r = num / std::sqrt(dh * dp);
      if (r > best) best = r, best_key = Key{t, m == 0 ? Mode::Major : Mode::Minor};
    }
  }
  CHECK(best_key == kCMinor);
  CHECK(infer_key(std::span<const Note>(fate)) == kCMinor);

  // Repeated C: C major scores highest.
  Motif cs = line({C4, C4, C4});
  CHECK(infer_key(std::span<const Note>(cs.notes)) == kCMajor);

  // Flat profile scores every key equally: the final bass pitch class decides.
  Motif chromatic = line({C4, 61, Eb4, E4, F4, Fs4, G4, Ab4, A4, 70, B4, D4});
  CHECK(infer_key(std::span<const Note>(chromatic.notes)) == Key{2, Mode::Major});

  CHECK_THROWS_AS(infer_key(std::span<const Note>()), Error);
}

TEST_CASE("strict repetition") {
  Motif fate = line({G4, G4, G4, Eb4});
  Motif longer_eb = fate;
  longer_eb.notes.back().duration *= 4;
  CHECK(is_strict(fate, longer_eb));
  CHECK_FALSE(is_strict(fate, line({G4, G4, Eb4})));
  CHECK_FALSE(is_strict(fate, line({F4, F4, F4, D4})));
}

TEST_CASE("transposition") {
  auto chromatic = transposition(line({C4, E4, G4}), line({D4, Fs4, A4}), kCMajor);
  REQUIRE(chromatic);
  CHECK(*chromatic == Transposition{TranspositionKind::Chromatic, 2});

  auto diatonic = transposition(line({G4, G4, G4, Eb4}), line({F4, F4, F4, D4}), kCMinor);
  REQUIRE(diatonic);
  CHECK(*diatonic == Transposition{TranspositionKind::Diatonic, -1});

  CHECK_FALSE(transposition(line({G4, G4, G4, Eb4}), line({Ab4, Ab4, Ab4, G4}), kCMinor));
  // Out-of-scale tones block the diatonic reading.
  CHECK_FALSE(transposition(line({C4, E4, G4}), line({D4, Fs4, B4}), kCMajor));
}

TEST_CASE("lcs similarity") {
  CHECK(lcs_similarity(std::vector<int>{G4, G4, G4, Eb4}, std::vector<int>{G4, G4, G4, D4}) == 0.75);
  CHECK(lcs_similarity(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3}) == 1.0);
  CHECK(lcs_similarity(std::vector<int>{1, 2, 3}, std::vector<int>{4, 5}) == 0.0);
  CHECK(lcs_similarity(std::vector<int>{}, std::vector<int>{4, 5}) == 0.0);
  CHECK(lcs_similarity(std::vector<int>{1, 3, 5, 7}, std::vector<int>{3, 7}) == 0.5);
}

TEST_CASE("subsequential repetition") {
  CHECK(is_subsequential(line({G4, G4, G4, Eb4}), line({G4, G4, G4, D4})));
  CHECK_FALSE(is_subsequential(line({C4, D4, E4, F4}), line({G4, A4, B4, C5})));
  CHECK(is_subsequential(line({C4, D4, E4, F4}), line({C4, D4, E4, G4})));
}

TEST_CASE("symmetry kinds") {
  const Motif base = line({E4, D4, E4, G4});
  CHECK(symmetry(base, line({E4, F4, E4, C4})) == SymmetryKind::Horizontal);
  CHECK(symmetry(base, line({E4, F4, G4, F4})) == SymmetryKind::Vertical);
  CHECK(symmetry(base, line({E4, D4, C4, A4})) == SymmetryKind::Rotational);
  // E4-D4-C4-A3 descends throughout (DDD) and only shares 2 of 3 directions with DDU.
  CHECK_FALSE(symmetry(base, line({E4, D4, C4, A3})).has_value());
}

TEST_CASE("homodirectional repetition") {
  CHECK(is_homodirectional(line({G4, G4, G4, Eb4}), line({Ab4, Ab4, Ab4, G4})));
  CHECK_FALSE(is_homodirectional(line({C4, D4, E4}), line({E4, D4, C4})));
  CHECK_FALSE(is_homodirectional(line({C4, D4, E4, F4}), line({G4, A4, B4, A4})));
}

TEST_CASE("classify cascade") {
  const Motif fate = line({G4, G4, G4, Eb4});
  CHECK(classify(fate, fate, kCMinor).type == RepetitionType::StR);

  const auto tr = classify(fate, line({F4, F4, F4, D4}), kCMinor);
  CHECK(tr.type == RepetitionType::TrR);
  CHECK(tr.detail() == "diatonic:-1");

  CHECK(classify(fate, line({G4, G4, G4, D4}), kCMinor).type == RepetitionType::SuR);
  CHECK(classify(fate, line({Ab4, Ab4, Ab4, G4}), kCMinor).type == RepetitionType::HoR);

  const Motif base = line({E4, D4, E4, G4});
  const auto h = classify(base, line({E4, F4, E4, C4}), kCMajor);
  CHECK(h.type == RepetitionType::SyR);
  CHECK(h.detail() == "horizontal");
  CHECK(classify(base, line({E4, F4, G4, F4}), kCMajor).detail() == "vertical");
  CHECK(classify(base, line({E4, D4, C4, A4}), kCMajor).detail() == "rotational");

  CHECK(classify(line({C4, D4, E4}), line({C4, E4, G4}), kCMajor).type == RepetitionType::Ambiguous);
  CHECK(classify(line({C4, D4, E4, F4}), line({B4, G4, B4, G4}), kCMajor).type == RepetitionType::None);

  CHECK_THROWS_AS(classify(Motif{}, fate, kCMajor), Error);
}

TEST_CASE("classify properties on random pairs") {
  std::mt19937 rng(9);
  const std::array<Key, 3> keys = {kCMajor, kCMinor, Key{7, Mode::Major}};
  for (int i = 0; i < 2000; ++i) {
    const bool poly = i % 2 == 0;
    Motif a = random_motif(rng, poly);
    Motif b = random_motif(rng, poly);
    const Key& key = keys[static_cast<std::size_t>(i % 3)];

    CHECK(classify(a, a, key).type == RepetitionType::StR);

    const auto ab = classify(a, b, key);
    const auto ba = classify(b, a, key);
    REQUIRE(ab.type == ba.type);
    CHECK(ab.symmetry == ba.symmetry);
    if (ab.transposition) {
      CHECK(ab.transposition->kind == ba.transposition->kind);
      CHECK(ab.transposition->offset == -ba.transposition->offset);
    }

    int t = std::uniform_int_distribution<int>(-12, 12)(rng);
    if (t == 0) t = 5;
    const auto tr = classify(a, shifted(a, t), key);
    CHECK(tr.type == RepetitionType::TrR);
    CHECK(tr.transposition == Transposition{TranspositionKind::Chromatic, t});
  }
}

TEST_CASE("repetition type names") {
  for (int i = 0; i <= static_cast<int>(RepetitionType::None); ++i) {
    const auto t = static_cast<RepetitionType>(i);
    CHECK(parse_repetition_type(to_string(t)) == t);
  }
  CHECK_FALSE(parse_repetition_type("XyZ").has_value());
}
