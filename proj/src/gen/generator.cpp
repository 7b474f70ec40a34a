#include "motifrep/gen/generator.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "motifrep/core/midi.h"
#include "motifrep/data/dataset.h"
#include "motifrep/error.h"

namespace motifrep {

using nlohmann::json;

namespace {

int& cell(TokenMatrix& t, int row, Attribute a) {
  return t.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(attr(a))];
}

bool has_notes(const TokenMatrix& t) {
  for (int r = 0; r < t.valid_len; ++r) {
    const int type = t.at(r, Attribute::Type);
    if (type == static_cast<int>(TokenType::End)) break;
    if (type == static_cast<int>(TokenType::Note)) return true;
  }
  return false;
}

void repair_row(TokenMatrix& t, int r) {
  auto clamp_to = [&](Attribute a, int lo, int hi) { cell(t, r, a) = std::clamp(cell(t, r, a), lo, hi); };
  clamp_to(Attribute::Type, 1, 3);
  clamp_to(Attribute::Tempo, 1, kVocabSizes[attr(Attribute::Tempo)] - 1);
  clamp_to(Attribute::Chord, 1, kVocabSizes[attr(Attribute::Chord)] - 1);
  clamp_to(Attribute::Position, 1, kSlotsPerBar);
  if (cell(t, r, Attribute::Type) == static_cast<int>(TokenType::Note)) {
    clamp_to(Attribute::Pitch, 1, 128);
    clamp_to(Attribute::Velocity, 1, kVelocityBins);
    // the note must end inside the bar: slot + duration <= 16
    clamp_to(Attribute::Duration, 1, kSlotsPerBar + 1 - cell(t, r, Attribute::Position));
  } else {
    cell(t, r, Attribute::Pitch) = kPad;
    cell(t, r, Attribute::Duration) = kPad;
    cell(t, r, Attribute::Velocity) = kPad;
  }
}

Mat<float> decode_with_noise(const RTransformer<float>& model, const TokenMatrix& motif, RepetitionType type,
                             double temperature, uint64_t seed) {
  Mat<float> out = model.decode(motif, class_index(type), motif.valid_len);
  if (temperature > 0) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += static_cast<float>(temperature * rng.normal());
  }
  return out;
}

}  // namespace

LabelStep parse_label_step(std::string_view token) {
  const auto colon = token.find(':');
  const std::string name(token.substr(0, colon));
  const auto type = parse_repetition_type(name);
  if (!type || !is_trainable(*type)) throw Error("unknown repetition label '" + std::string(token) + "'");
  LabelStep step{*type, std::nullopt};
  if (colon != std::string_view::npos) {
    if (*type != RepetitionType::TrR) throw Error("only TrR takes a transposition: '" + std::string(token) + "'");
    const std::string value(token.substr(colon + 1));
    std::size_t used = 0;
    int t = 0;
    try {
      t = std::stoi(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw Error("bad transposition in '" + std::string(token) + "'");
    step.t = t;
  }
  return step;
}

std::vector<LabelStep> parse_label_list(std::string_view list) {
  std::vector<LabelStep> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto end = comma == std::string_view::npos ? list.size() : comma;
    auto tok = list.substr(start, end - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok.empty()) throw Error("empty entry in label list '" + std::string(list) + "'");
    out.push_back(parse_label_step(tok));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string to_string(const LabelStep& step) {
  std::string s(to_string(step.type));
  if (step.t) s += ":" + std::to_string(*step.t);
  return s;
}

void check_request(const GenerationRequest& req) {
  if (req.labels.empty()) throw ValidityError("$.labels", "no labels requested");
  if (!has_notes(req.motif)) throw ValidityError("$.motif", "motif has no notes");
  for (std::size_t i = 0; i < req.labels.size(); ++i) {
    const auto& s = req.labels[i];
    const std::string where = "$.labels[" + std::to_string(i) + "]";
    if (!is_trainable(s.type)) throw ValidityError(where, "not a repetition type");
    if (!s.t) continue;
    const std::string t_path = "$.t[" + std::to_string(i) + "]";
    if (s.type != RepetitionType::TrR) throw ValidityError(t_path, "t is only valid for TrR");
    if (*s.t == 0) throw ValidityError(t_path, "t must be non-zero");
    if (std::abs(*s.t) > kMaxTransposition) throw ValidityError(t_path, "|t| must be <= 24");
  }
}

TokenMatrix discretize(const Mat<float>& decoded, int valid_len) {
  if (decoded.cols() != kNumAttributes || decoded.rows() < valid_len) throw Error("decoded matrix has the wrong shape");
  TokenMatrix t;
  t.valid_len = valid_len;
  for (int r = 0; r < valid_len; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const float v = decoded(r, k);
      const int tok = std::isfinite(v) ? static_cast<int>(std::lround(std::clamp(v, -1e6f, 1e6f))) : 0;
      t.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
          std::clamp(tok, 0, kVocabSizes[static_cast<std::size_t>(k)] - 1);
    }
    repair_row(t, r);
  }
  return t;
}

TokenMatrix generate_one(const TokenMatrix& motif, const LabelStep& step, const RTransformer<float>* model,
                         const GenerateOptions& options, uint64_t seed, Diagnostics* diag) {
  validate(motif);
  if (!has_notes(motif)) throw ValidityError("motif", "cannot generate from an empty motif");
  if (!is_trainable(step.type)) throw Error("not a repetition type: " + std::string(to_string(step.type)));
  if (step.t) {
    if (step.type != RepetitionType::TrR) throw Error("t is only valid for TrR");
    if (*step.t == 0 || std::abs(*step.t) > kMaxTransposition) throw Error("t must be non-zero with |t| <= 24");
  }

  const bool rule = options.rules && (step.type == RepetitionType::StR || step.type == RepetitionType::TrR);
  if (!rule) {
    if (!model) throw Error(std::string(to_string(step.type)) + " generation needs a model");
    return discretize(decode_with_noise(*model, motif, step.type, options.temperature, seed), motif.valid_len);
  }

  int t = 0;
  if (step.type == RepetitionType::TrR) {
    if (!step.t && !model) throw Error("TrR needs a transposition t when no model is loaded");
    t = step.t.value_or(kDefaultTransposition);
  }
  TokenMatrix out;
  if (model && !options.copy_columns) {
    out = discretize(decode_with_noise(*model, motif, step.type, options.temperature, seed), motif.valid_len);
  } else {
    out = motif;
  }
  int clamped = 0;
  for (int r = 0; r < motif.valid_len; ++r) {
    for (Attribute a : {Attribute::Position, Attribute::Type, Attribute::Pitch}) cell(out, r, a) = motif.at(r, a);
    if (motif.at(r, Attribute::Type) == static_cast<int>(TokenType::Note)) {
      const int shifted = motif.at(r, Attribute::Pitch) - 1 + t;
      const int pitch = std::clamp(shifted, 0, 127);
      if (pitch != shifted) ++clamped;
      cell(out, r, Attribute::Pitch) = pitch + 1;
    }
    repair_row(out, r);
  }
  if (clamped && diag) diag->warn("TrR t=" + std::to_string(t) + ": " + std::to_string(clamped) + " pitch(es) clamped to [0, 127]");
  return out;
}

Piece generate_piece(const GenerationRequest& req, const RTransformer<float>* model, const GenerateOptions& options,
                     Diagnostics* diag) {
  check_request(req);
  Piece piece;
  piece.provenance = req;
  piece.motifs.push_back(PieceMotif{req.motif, std::nullopt, std::nullopt, 0});
  std::size_t source = 0;
  for (std::size_t i = 0; i < req.labels.size(); ++i) {
    TokenMatrix out = generate_one(piece.motifs[source].tokens, req.labels[i], model, options, req.seed + i, diag);
    const bool usable = has_notes(out);
    piece.motifs.push_back(PieceMotif{std::move(out), req.labels[i], std::nullopt, source});
    if (!req.chaining) continue;
    if (usable) {
      source = piece.motifs.size() - 1;
    } else if (diag) {
      diag->warn("motif " + std::to_string(i + 1) + " has no notes; the next step repeats motif " +
                 std::to_string(source) + " instead");
    }
  }
  std::vector<Note> notes;
  for (std::size_t i = 0; i < piece.motifs.size(); ++i) {
    const Motif m = detokenize(piece.motifs[i].tokens, static_cast<int>(i));
    notes.insert(notes.end(), m.notes.begin(), m.notes.end());
  }
  piece.key = infer_key(notes);
  for (std::size_t i = 1; i < piece.motifs.size(); ++i) {
    const TokenMatrix& src = piece.motifs[piece.motifs[i].source].tokens;
    piece.motifs[i].verified = classify_tokens(src, piece.motifs[i].tokens, piece.key);
  }
  return piece;
}

NoteSequence render_piece(const Piece& piece) {
  if (piece.motifs.empty()) throw Error("cannot render an empty piece");
  NoteSequence seq;
  seq.ticks_per_quarter = kDefaultTicksPerQuarter;
  seq.tempo_events.push_back(TempoEvent{0, token_bpm(piece.motifs.front().tokens)});
  for (std::size_t i = 0; i < piece.motifs.size(); ++i) {
    const Motif m = detokenize(piece.motifs[i].tokens, static_cast<int>(i), seq.ticks_per_quarter);
    seq.notes.insert(seq.notes.end(), m.notes.begin(), m.notes.end());
  }
  seq.sort();
  return seq;
}

std::vector<uint8_t> render_midi(const Piece& piece) { return write_midi(render_piece(piece)); }

void render_midi_file(const Piece& piece, const std::filesystem::path& path) {
  write_midi_file(render_piece(piece), path);
}

json request_to_json(const GenerationRequest& req) {
  json labels = json::array(), ts = json::array();
  for (const auto& s : req.labels) {
    labels.push_back(std::string(to_string(s.type)));
    ts.push_back(s.t ? json(*s.t) : json(nullptr));
  }
  return json{{"motif", {{"valid_len", req.motif.valid_len}, {"rows", token_rows_to_json(req.motif)}}},
              {"labels", labels},
              {"t", ts},
              {"seed", req.seed},
              {"chaining", req.chaining}};
}

GenerationRequest request_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  GenerationRequest req;
  if (!j.contains("motif")) throw SchemaError("$.motif", "missing");
  req.motif = token_matrix_from_json(j.at("motif"), "$.motif");
  try {
    validate(req.motif);
  } catch (const VocabularyError& e) {
    throw SchemaError("$.motif.rows[" + std::to_string(e.row()) + "][" + std::to_string(e.attribute()) + "]", e.what());
  } catch (const Error& e) {
    throw SchemaError("$.motif", e.what());
  }
  if (!j.contains("labels")) throw SchemaError("$.labels", "missing");
  const json& labels = j.at("labels");
  if (!labels.is_array()) throw SchemaError("$.labels", "expected an array of label names");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string p = "$.labels[" + std::to_string(i) + "]";
    if (!labels[i].is_string()) throw SchemaError(p, "expected a string");
    const auto type = parse_repetition_type(labels[i].get<std::string>());
    if (!type || !is_trainable(*type)) throw ValidityError(p, "unknown repetition label '" + labels[i].get<std::string>() + "'");
    req.labels.push_back(LabelStep{*type, std::nullopt});
  }
  if (j.contains("t") && !j.at("t").is_null()) {
    const json& ts = j.at("t");
    if (!ts.is_array() || ts.size() != labels.size()) throw SchemaError("$.t", "expected an array parallel to labels");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i].is_null()) continue;
      if (!ts[i].is_number_integer()) throw SchemaError("$.t[" + std::to_string(i) + "]", "expected an integer or null");
      req.labels[i].t = ts[i].get<int>();
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw SchemaError("$.seed", "expected a non-negative integer");
    req.seed = j.at("seed").get<uint64_t>();
  }
  if (j.contains("chaining")) {
    if (!j.at("chaining").is_boolean()) throw SchemaError("$.chaining", "expected a boolean");
    req.chaining = j.at("chaining").get<bool>();
  }
  return req;
}

json piece_to_json(const Piece& piece) {
  json motifs = json::array();
  for (const auto& m : piece.motifs) {
    json jm{{"valid_len", m.tokens.valid_len}, {"rows", token_rows_to_json(m.tokens)}};
    jm["requested"] = m.requested ? json(to_string(*m.requested)) : json(nullptr);
    jm["source"] = m.source;
    if (m.verified) {
      jm["verified"] = {{"label", std::string(to_string(m.verified->type))}, {"detail", m.verified->detail()}};
    } else {
      jm["verified"] = nullptr;
    }
    motifs.push_back(std::move(jm));
  }
  return json{{"motifs", motifs}, {"key", piece.key.name()}, {"provenance", request_to_json(piece.provenance)}};
}

}  // namespace motifrep
