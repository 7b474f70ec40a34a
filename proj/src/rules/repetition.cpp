#include "motifrep/rules/repetition.h"

#include <cmath>
#include <numeric>

#include "motifrep/core/segment.h"
#include "motifrep/error.h"

namespace motifrep {
namespace {

constexpr std::array<std::string_view, 7> kTypeNames = {"StR", "TrR", "SuR", "HoR", "SyR", "Ambiguous", "None"};
constexpr std::array<std::string_view, 12> kTonicNames = {"C", "C#", "D", "Eb", "E", "F",
                                                          "F#", "G", "Ab", "A", "Bb", "B"};
constexpr std::array<int, 7> kMajorSteps = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinorSteps = {0, 2, 3, 5, 7, 8, 10};

// Krumhansl-Kessler probe-tone profiles.
constexpr std::array<double, 12> kMajorProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                  2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                  2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

double correlation(const std::array<double, 12>& x, const std::array<double, 12>& profile, int tonic) {
  double mx = 0, my = 0;
  for (int i = 0; i < 12; ++i) {
    mx += x[static_cast<std::size_t>(i)];
    my += profile[static_cast<std::size_t>(i)];
  }
  mx /= 12;
  my /= 12;
  double sxy = 0, sxx = 0, syy = 0;
  for (int pc = 0; pc < 12; ++pc) {
    const double dx = x[static_cast<std::size_t>(pc)] - mx;
    const double dy = profile[static_cast<std::size_t>((pc - tonic + 12) % 12)] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<Transposition> constant_shift(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty()) return std::nullopt;
  const int t = b[0] - a[0];
  if (t == 0) return std::nullopt;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (b[i] - a[i] != t) return std::nullopt;
  }
  return Transposition{TranspositionKind::Chromatic, t};
}

std::optional<SymmetryKind> symmetry_of(const DevSequence& da, const DevSequence& db, double threshold) {
  if (lcs_similarity(negate(da), db) >= threshold) return SymmetryKind::Horizontal;
  if (lcs_similarity(reversed(da), db) >= threshold) return SymmetryKind::Vertical;
  if (lcs_similarity(negate(reversed(da)), db) >= threshold) return SymmetryKind::Rotational;
  return std::nullopt;
}

std::optional<Transposition> transposition_of(const PitchView& a, const PitchView& b, const Key& key) {
  if (auto chromatic = constant_shift(a.full, b.full)) return chromatic;
  if (a.melody.size() != b.melody.size() || a.melody.empty()) return std::nullopt;
  std::vector<int> da, db;
  for (std::size_t i = 0; i < a.melody.size(); ++i) {
    auto x = key.degree(a.melody[i]);
    auto y = key.degree(b.melody[i]);
    if (!x || !y) return std::nullopt;
    da.push_back(*x);
    db.push_back(*y);
  }
  if (auto shift = constant_shift(da, db)) return Transposition{TranspositionKind::Diatonic, shift->offset};
  return std::nullopt;
}

}  // namespace

std::string_view to_string(RepetitionType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<RepetitionType> parse_repetition_type(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<RepetitionType>(i);
  }
  return std::nullopt;
}

std::string_view to_string(TranspositionKind kind) {
  return kind == TranspositionKind::Chromatic ? "chromatic" : "diatonic";
}

std::string_view to_string(SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::Horizontal:
      return "horizontal";
    case SymmetryKind::Vertical:
      return "vertical";
    case SymmetryKind::Rotational:
      return "rotational";
  }
  return "";
}

std::string RepetitionLabel::detail() const {
  if (transposition) {
    const int t = transposition->offset;
    return std::string(to_string(transposition->kind)) + ":" + (t > 0 ? "+" : "") + std::to_string(t);
  }
  if (symmetry) return std::string(to_string(*symmetry));
  return {};
}

DevSequence development(std::span<const int> melody) {
  DevSequence dev;
  if (melody.size() < 2) return dev;
  dev.reserve(melody.size() - 1);
  for (std::size_t i = 0; i + 1 < melody.size(); ++i) {
    const int d = melody[i + 1] - melody[i];
    dev.push_back(d > 0 ? Direction::Up : d < 0 ? Direction::Down : Direction::Same);
  }
  return dev;
}

DevSequence negate(const DevSequence& dev) {
  DevSequence out(dev.size());
  std::transform(dev.begin(), dev.end(), out.begin(),
                 [](Direction d) { return static_cast<Direction>(-static_cast<int>(d)); });
  return out;
}

DevSequence reversed(const DevSequence& dev) { return DevSequence(dev.rbegin(), dev.rend()); }

std::string to_string(const DevSequence& dev) {
  std::string s;
  for (Direction d : dev) s.push_back(d == Direction::Up ? 'U' : d == Direction::Down ? 'D' : 'S');
  return s;
}

std::array<int, 7> Key::scale() const {
  const auto& steps = mode == Mode::Major ? kMajorSteps : kMinorSteps;
  std::array<int, 7> out{};
  for (std::size_t i = 0; i < 7; ++i) out[i] = (tonic + steps[i]) % 12;
  return out;
}

bool Key::contains(int pitch) const { return degree(pitch).has_value(); }

std::optional<int> Key::degree(int pitch) const {
  const int rel = pitch - tonic;
  const int octave = floor_div(rel, 12);
  const int pc = rel - 12 * octave;
  const auto& steps = mode == Mode::Major ? kMajorSteps : kMinorSteps;
  for (int i = 0; i < 7; ++i) {
    if (steps[static_cast<std::size_t>(i)] == pc) return octave * 7 + i;
  }
  return std::nullopt;
}

std::string Key::name() const {
  return std::string(kTonicNames[static_cast<std::size_t>(tonic)]) + (mode == Mode::Major ? " major" : " minor");
}

std::optional<Key> parse_key(std::string_view name) {
  for (int t = 0; t < 12; ++t) {
    for (Mode m : {Mode::Major, Mode::Minor}) {
      Key k{t, m};
      if (k.name() == name) return k;
    }
  }
  return std::nullopt;
}

Key infer_key(std::span<const Note> notes) {
  if (notes.empty()) throw Error("infer_key: empty note list");
  std::array<double, 12> hist{};
  int64_t last_onset = notes.front().onset;
  for (const auto& n : notes) last_onset = std::max(last_onset, n.onset);
  int bass = 128;
  for (const auto& n : notes) {
    hist[static_cast<std::size_t>(n.pitch % 12)] += static_cast<double>(n.duration);
    if (n.onset == last_onset) bass = std::min(bass, n.pitch);
  }
  const int bass_pc = bass % 12;

  Key best;
  double best_score = -2.0;
  bool have = false;
  constexpr double kTieEps = 1e-12;
  for (int tonic = 0; tonic < 12; ++tonic) {
    for (Mode mode : {Mode::Major, Mode::Minor}) {
      const double score = correlation(hist, mode == Mode::Major ? kMajorProfile : kMinorProfile, tonic);
      const Key cand{tonic, mode};
      if (!have || score > best_score + kTieEps) {
        best = cand;
        best_score = score;
        have = true;
      } else if (std::abs(score - best_score) <= kTieEps && best.tonic != bass_pc && cand.tonic == bass_pc) {
        // Equal score: the final-bass tonic wins; otherwise the earlier (lower) key stays.
        best = cand;
      }
    }
  }
  return best;
}

Key infer_key(const NoteSequence& seq) { return infer_key(std::span<const Note>(seq.notes)); }

PitchView pitch_view(const Motif& m) {
  PitchView v;
  v.full = m.pitches();
  if (!m.empty()) v.melody = extract_melody(m);
  return v;
}

bool is_strict(const Motif& a, const Motif& b) { return a.pitches() == b.pitches(); }

std::optional<Transposition> transposition(const Motif& a, const Motif& b, const Key& key) {
  return transposition_of(pitch_view(a), pitch_view(b), key);
}

bool is_subsequential(const Motif& a, const Motif& b, double threshold) {
  return lcs_similarity(extract_melody(a), extract_melody(b)) >= threshold;
}

std::optional<SymmetryKind> symmetry(const Motif& a, const Motif& b, double threshold) {
  const auto ma = extract_melody(a);
  const auto mb = extract_melody(b);
  return symmetry_of(development(ma), development(mb), threshold);
}

bool is_homodirectional(const Motif& a, const Motif& b, double threshold) {
  const auto ma = extract_melody(a);
  const auto mb = extract_melody(b);
  return lcs_similarity(development(ma), development(mb)) >= threshold;
}

RepetitionLabel classify(const PitchView& a, const PitchView& b, const Key& key, double threshold) {
  if (a.full.empty() || b.full.empty()) throw Error("classify: empty motif");
  RepetitionLabel label;
  if (a.full == b.full) {
    label.type = RepetitionType::StR;
    return label;
  }
  if (auto t = transposition_of(a, b, key)) {
    label.type = RepetitionType::TrR;
    label.transposition = t;
    return label;
  }
  if (lcs_similarity(a.melody, b.melody) >= threshold) {
    label.type = RepetitionType::SuR;
    return label;
  }
  const DevSequence da = development(a.melody);
  const DevSequence db = development(b.melody);
  const bool homodirectional = lcs_similarity(da, db) >= threshold;
  const auto sym = symmetry_of(da, db, threshold);
  label.symmetry = sym;
  if (homodirectional && sym) {
    label.type = RepetitionType::Ambiguous;
  } else if (homodirectional) {
    label.type = RepetitionType::HoR;
  } else if (sym) {
    label.type = RepetitionType::SyR;
  }
  return label;
}

RepetitionLabel classify(const Motif& a, const Motif& b, const Key& key, double threshold) {
  if (a.empty() || b.empty()) throw Error("classify: empty motif");
  return classify(pitch_view(a), pitch_view(b), key, threshold);
}

}  // namespace motifrep
