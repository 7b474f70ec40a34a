/**
 * @file bindings.cpp
 * @brief pybind11 module exposing tokenization, classification, generation, evaluation
 *        and the service handlers. Token matrices cross the boundary as lists of 7-int rows.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "motifrep/app/service.h"
#include "motifrep/core/midi.h"
#include "motifrep/core/tokenizer.h"
#include "motifrep/data/dataset.h"
#include "motifrep/error.h"
#include "motifrep/eval/evaluate.h"
#include "motifrep/gen/generator.h"
#include "motifrep/model/checkpoint.h"
#include "motifrep/rules/repetition.h"

namespace py = pybind11;
using nlohmann::json;
using namespace motifrep;

namespace {

using Rows = std::vector<TokenRow>;

TokenMatrix to_matrix(const Rows& rows) {
  if (rows.size() > static_cast<std::size_t>(kMaxRows)) {
    throw ValidityError("$.rows", "at most " + std::to_string(kMaxRows) + " rows");
  }
  TokenMatrix t;
  std::copy(rows.begin(), rows.end(), t.rows.begin());
  t.valid_len = static_cast<int>(rows.size());
  validate(t);
  return t;
}

Rows to_rows(const TokenMatrix& t) { return Rows(t.rows.begin(), t.rows.begin() + t.valid_len); }

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Key key_or_infer(const std::optional<std::string>& name, const Motif& a, const Motif& b) {
  if (name) {
    const auto k = parse_key(*name);
    if (!k) throw SchemaError("key", "expected a key name such as \"C major\"");
    return *k;
  }
  std::vector<Note> notes = a.notes;
  notes.insert(notes.end(), b.notes.begin(), b.notes.end());
  return infer_key(notes);
}

py::dict label_dict(const RepetitionLabel& label, const Key& key) {
  py::dict d;
  d["label"] = std::string(to_string(label.type));
  d["detail"] = label.detail();
  d["key"] = key.name();
  return d;
}

py::tuple response(const HttpResponse& r) { return py::make_tuple(r.status, to_py(r.body)); }

py::dict generate(const Rows& motif, const std::string& labels, uint64_t seed, bool chaining, bool rules,
                  double temperature, const ModelState* state) {
  GenerationRequest req;
  req.motif = to_matrix(motif);
  req.labels = parse_label_list(labels);
  req.seed = seed;
  req.chaining = chaining;
  GenerateOptions options;
  options.rules = rules;
  options.temperature = temperature;
  Diagnostics diag;
  const Piece piece = generate_piece(req, state ? &state->model : nullptr, options, &diag);
  const auto midi = render_midi(piece);
  py::list motifs;
  for (const auto& m : piece.motifs) motifs.append(to_rows(m.tokens));
  py::dict out;
  out["motifs"] = motifs;
  out["piece"] = to_py(piece_to_json(piece));
  out["warnings"] = diag.warnings();
  out["midi"] = py::bytes(reinterpret_cast<const char*>(midi.data()), midi.size());
  return out;
}

}  // namespace

PYBIND11_MODULE(_motifrep, m) {
  m.doc() = "Motif repetition analysis and generation";

  static py::exception<Error> error(m, "MotifrepError", PyExc_RuntimeError);
  static py::exception<SchemaError> schema_error(m, "SchemaError", error.ptr());
  static py::exception<ValidityError> validity_error(m, "ValidityError", error.ptr());
  static py::exception<VocabularyError> vocabulary_error(m, "VocabularyError", error.ptr());
  static py::exception<CheckpointError> checkpoint_error(m, "CheckpointError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SchemaError& e) {
      PyErr_SetString(schema_error.ptr(), e.what());
    } catch (const ValidityError& e) {
      PyErr_SetString(validity_error.ptr(), e.what());
    } catch (const VocabularyError& e) {
      PyErr_SetString(vocabulary_error.ptr(), e.what());
    } catch (const CheckpointError& e) {
      PyErr_SetString(checkpoint_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.attr("MAX_ROWS") = kMaxRows;
  m.attr("NUM_ATTRIBUTES") = kNumAttributes;

  m.def(
      "tokenize", [](const std::vector<int>& pitches, double bpm) { return to_rows(tokenize(make_line_motif(pitches), bpm)); },
      py::arg("pitches"), py::arg("bpm") = kDefaultBpm, "Token rows of a one-note-per-slot line motif.");
  m.def(
      "detokenize",
      [](const Rows& rows) {
        py::list notes;
        for (const Note& n : detokenize(to_matrix(rows)).notes) {
          py::dict d;
          d["pitch"] = n.pitch;
          d["onset"] = n.onset;
          d["duration"] = n.duration;
          d["velocity"] = n.velocity;
          notes.append(d);
        }
        return notes;
      },
      py::arg("rows"), "Notes of a token matrix as dicts with pitch, onset, duration and velocity.");
  m.def(
      "pitches", [](const Rows& rows) { return detokenize(to_matrix(rows)).pitches(); }, py::arg("rows"));
  m.def(
      "validate", [](const Rows& rows) { to_matrix(rows); }, py::arg("rows"));

  m.def(
      "classify",
      [](const Rows& a, const Rows& b, std::optional<std::string> key) {
        const Motif ma = detokenize(to_matrix(a), 0);
        const Motif mb = detokenize(to_matrix(b), 1);
        const Key k = key_or_infer(key, ma, mb);
        return label_dict(classify(ma, mb, k), k);
      },
      py::arg("a"), py::arg("b"), py::arg("key") = py::none(), "Repetition label of token motif b relative to a.");
  m.def(
      "classify_pitches",
      [](const std::vector<int>& a, const std::vector<int>& b, std::optional<std::string> key) {
        const Motif ma = make_line_motif(a, 0);
        const Motif mb = make_line_motif(b, 1);
        const Key k = key_or_infer(key, ma, mb);
        return label_dict(classify(ma, mb, k), k);
      },
      py::arg("a"), py::arg("b"), py::arg("key") = py::none(), "Repetition label of line motif b relative to a.");
  m.def(
      "development",
      [](const std::vector<int>& melody) {
        std::vector<int> out;
        for (Direction d : development(melody)) out.push_back(static_cast<int>(d));
        return out;
      },
      py::arg("melody"), "Signs of consecutive pitch differences.");
  m.def(
      "lcs_similarity", [](const std::vector<int>& p, const std::vector<int>& q) { return lcs_similarity(p, q); },
      py::arg("p"), py::arg("q"));

  py::class_<ModelState>(m, "Model")
      .def_static(
          "load", [](const std::filesystem::path& path) { return load_checkpoint(path); }, py::arg("path"))
      .def_property_readonly("variant", [](const ModelState& s) { return std::string(to_string(s.variant)); })
      .def_readonly("step", &ModelState::step)
      .def_property_readonly("checkpoint_hash", [](const ModelState& s) { return checkpoint_hash(s); })
      .def_property_readonly("config", [](const ModelState& s) { return to_py(to_json(s.model.config())); })
      .def(
          "evaluate",
          [](const ModelState& s, const std::filesystem::path& dataset_dir, std::optional<std::string> variant,
             uint64_t seed) {
            Variant v = s.variant;
            if (variant) {
              const auto parsed = parse_variant(*variant);
              if (!parsed) throw Error("unknown variant '" + *variant + "'");
              v = *parsed;
            }
            const DatasetSplit split = read_dataset_dir(dataset_dir);
            json report;
            {
              py::gil_scoped_release release;
              report = to_json(evaluate_variant(v, s.model, split.test, seed));
            }
            return to_py(report);
          },
          py::arg("dataset_dir"), py::arg("variant") = py::none(), py::arg("seed") = 0,
          "Matching-rate report over the test split.");

  m.def(
      "generate",
      [](const Rows& motif, const std::string& labels, const ModelState* model, uint64_t seed, bool chaining,
         bool rules, double temperature) { return generate(motif, labels, seed, chaining, rules, temperature, model); },
      py::arg("motif"), py::arg("labels"), py::arg("model") = nullptr, py::arg("seed") = 0, py::arg("chaining") = true,
      py::arg("rules") = true, py::arg("temperature") = 0.0,
      "Piece of len(labels) + 1 motifs. Labels are comma-separated, e.g. \"StR,TrR:-2,SyR\".");

  py::class_<Service>(m, "Service")
      .def(py::init([](const py::object& config) {
             return Service(config.is_none() ? ServiceConfig{} : service_config_from_json(from_py(config)));
           }),
           py::arg("config") = py::none())
      .def("load_model", &Service::load_model, py::arg("path"))
      .def_property_readonly("model_loaded", &Service::model_loaded)
      .def(
          "classify", [](const Service& s, const std::string& body) { return response(s.classify(body)); },
          py::arg("body"))
      .def(
          "check", [](const Service& s, const std::string& body) { return response(s.check(body)); }, py::arg("body"))
      .def(
          "generate", [](const Service& s, const std::string& body) { return response(s.generate(body)); },
          py::arg("body"))
      .def("model_info", [](const Service& s) { return response(s.model_info()); });
}
