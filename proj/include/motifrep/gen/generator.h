/**
 * @file generator.h
 * @brief Repetition synthesis: rule branches for StR/TrR, model decoding for the rest,
 *        sequential multi-label pieces and MIDI rendering.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "motifrep/core/note.h"
#include "motifrep/model/transformer.h"

namespace motifrep {

inline constexpr int kMaxTransposition = 24;
inline constexpr int kDefaultTransposition = -2;

/// One requested step: a repetition type and, for TrR, a transposition in semitones.
struct LabelStep {
  RepetitionType type = RepetitionType::StR;
  std::optional<int> t;
  bool operator==(const LabelStep&) const = default;
};

/// "StR", "TrR:-2", ...; throws Error on unknown names or a malformed t.
LabelStep parse_label_step(std::string_view token);
/// Comma-separated list of label steps.
std::vector<LabelStep> parse_label_list(std::string_view list);
std::string to_string(const LabelStep& step);

struct GenerationRequest {
  TokenMatrix motif;
  std::vector<LabelStep> labels;
  uint64_t seed = 0;
  bool chaining = true;
};

/// Throws ValidityError on an empty label list or motif, a t on a non-TrR step, t == 0 or |t| > 24.
void check_request(const GenerationRequest& req);

struct GenerateOptions {
  bool rules = true;          // StR/TrR by rule (RR); otherwise every label is model-decoded
  bool copy_columns = false;  // rule branches copy non-pitch columns instead of decoding them
  double temperature = 0.0;   // std of Gaussian noise added to decoded values before rounding
};

/// Round each decoded value to the nearest token, clamp into the vocabulary and repair row
/// structure so the result validates: valid rows get a non-pad type, note rows get non-pad
/// position/pitch/duration/velocity with the note ending inside the bar, metric and end
/// rows carry pad pitch/duration/velocity.
TokenMatrix discretize(const Mat<float>& decoded, int valid_len);

/// One repetition of `motif`. `model` may be null only for rule branches with t given (or
/// copy_columns set). Pitch clamping after a shift is reported through `diag`.
TokenMatrix generate_one(const TokenMatrix& motif, const LabelStep& step, const RTransformer<float>* model,
                         const GenerateOptions& options, uint64_t seed, Diagnostics* diag = nullptr);

struct PieceMotif {
  TokenMatrix tokens;
  std::optional<LabelStep> requested;      // empty for the input motif
  std::optional<RepetitionLabel> verified;  // classify(source, tokens) under the piece key
  std::size_t source = 0;                   // index of the motif this one repeats
};

struct Piece {
  std::vector<PieceMotif> motifs;
  GenerationRequest provenance;
  Key key;
};

/// Step i repeats the previous motif when chaining (the input otherwise). A chained step whose
/// output has no notes is skipped as a source: the next step repeats the last motif with notes.
Piece generate_piece(const GenerationRequest& req, const RTransformer<float>* model, const GenerateOptions& options,
                     Diagnostics* diag = nullptr);

/// One bar per motif at the first motif's tempo. Throws on an empty piece.
NoteSequence render_piece(const Piece& piece);
std::vector<uint8_t> render_midi(const Piece& piece);
void render_midi_file(const Piece& piece, const std::filesystem::path& path);

nlohmann::json request_to_json(const GenerationRequest& req);
/// Parses {"motif", "labels", "t"?, "seed"?, "chaining"?}; throws SchemaError with a field path.
GenerationRequest request_from_json(const nlohmann::json& j);
nlohmann::json piece_to_json(const Piece& piece);

}  // namespace motifrep
