/**
 * @file motifrep_cli.cpp
 * @brief The motifrep command-line tool: ingest, synth, build-dataset, train, generate,
 *        classify, evaluate and serve.
 *
 * Exit codes: 0 success, 1 other failure, 2 usage, 3 invalid input, 4 checkpoint,
 * 5 training divergence.
 */

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "motifrep/app/config_file.h"
#include "motifrep/app/service.h"
#include "motifrep/core/midi.h"
#include "motifrep/data/dataset.h"
#include "motifrep/data/synthetic.h"
#include "motifrep/error.h"
#include "motifrep/eval/evaluate.h"
#include "motifrep/gen/generator.h"
#include "motifrep/model/checkpoint.h"
#include "motifrep/model/trainer.h"

namespace fs = std::filesystem;
using namespace motifrep;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kInput = 3, kCheckpoint = 4, kDivergence = 5 };

/// Usage problems detected after CLI11 parsing (bad label list, bad variant name).
struct UsageError : Error {
  using Error::Error;
};

void print_warnings(const Diagnostics& diag, bool verbose) {
  if (diag.empty()) return;
  if (verbose) {
    for (const auto& w : diag.warnings()) std::cerr << "warning: " << w << '\n';
  } else {
    std::cerr << diag.warnings().size() << " warning(s); rerun with --verbose to list them\n";
  }
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_config_file(path); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + " (byte " + std::to_string(e.byte) + ")", "malformed JSON");
  }
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// "SyR (horizontal)", "TrR (chromatic:-2)", "StR".
std::string describe(const RepetitionLabel& label) {
  const std::string detail = label.detail();
  return std::string(to_string(label.type)) + (detail.empty() ? "" : " (" + detail + ")");
}

Variant variant_arg(const std::string& name) {
  const auto v = parse_variant(name);
  if (!v) throw UsageError("unknown variant '" + name + "' (expected V, R or RR)");
  return *v;
}

std::vector<fs::path> midi_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".mid" || ext == ".midi") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_ingest(const std::string& dir, const std::string& out, bool verbose) {
  std::vector<MotifRecord> records;
  Diagnostics diag;
  long skipped = 0;
  const auto files = midi_files(dir);
  for (const auto& f : files) {
    try {
      const NoteSequence seq = read_midi_file(f, &diag);
      auto recs = ingest(seq, f.stem().string(), &diag);
      records.insert(records.end(), recs.begin(), recs.end());
    } catch (const UnsupportedMeterError& e) {
      ++skipped;
      diag.warn(f.string() + ": skipped: " + e.what());
    }
  }
  write_motifs_jsonl(records, out);
  std::cout << "ingested " << files.size() - skipped << " file(s), " << records.size() << " motif(s) -> " << out
            << '\n';
  if (skipped) std::cout << "skipped " << skipped << " file(s) with an unsupported meter\n";
  print_warnings(diag, verbose);
  return kOk;
}

int cmd_synth(const std::string& out, const std::string& config_path, int songs_per_class, uint64_t seed) {
  SyntheticConfig c;
  const json cfg = config_section(load_config(config_path), "synthetic");
  if (cfg.contains("songs_per_class")) c.songs_per_class = cfg.at("songs_per_class").get<int>();
  if (cfg.contains("seed")) c.seed = cfg.at("seed").get<uint64_t>();
  if (cfg.contains("accompaniment_rate")) c.accompaniment_rate = cfg.at("accompaniment_rate").get<double>();
  if (songs_per_class > 0) c.songs_per_class = songs_per_class;
  if (seed) c.seed = seed;
  fs::create_directories(out);
  const auto corpus = synthetic_corpus(c);
  for (const auto& song : corpus) write_midi_file(song.notes, fs::path(out) / (song.id + ".mid"));
  std::cout << "wrote " << corpus.size() << " song(s) -> " << out << '\n';
  return kOk;
}

int cmd_build_dataset(const std::string& motifs, const std::string& config_path, const std::string& out,
                      bool verbose) {
  const DatasetConfig config = dataset_config_from_json(config_section(load_config(config_path), "dataset"));
  const auto records = read_motifs_jsonl(motifs);
  BuildReport report;
  Diagnostics diag;
  const auto samples = build_dataset(records, config, &report, &diag);
  const DatasetSplit parts = split(samples, config.holdout_songs, config.seed);
  write_dataset_dir(out, parts, config, report);
  std::cout << "pairs " << report.pairs << ", kept " << report.kept << ", ambiguous " << report.ambiguous << " ("
            << std::fixed << std::setprecision(2) << 100.0 * report.ambiguous_rate() << "%), unrelated "
            << report.unrelated << '\n';
  std::cout << format_manifest(stats(parts.train, "train"));
  std::cout << format_manifest(stats(parts.test, "test"));
  print_warnings(diag, verbose);
  return kOk;
}

int cmd_train(const std::string& dataset, const std::string& config_path, const std::string& out,
              const std::string& variant_name, const std::string& log, uint64_t seed, long max_steps) {
  const json cfg = load_config(config_path);
  const ModelConfig model_config = model_config_from_json(config_section(cfg, "model"));
  TrainOptions options = train_options_from_json(config_section(cfg, "train"));
  if (seed) options.seed = seed;
  if (max_steps > 0) options.max_steps = max_steps;
  const Variant variant = variant_arg(variant_name);
  const DatasetSplit data = read_dataset_dir(dataset);
  if (data.train.empty()) throw ValidityError(dataset, "training split is empty");

  ModelState state(model_config, variant, options.seed);
  std::ofstream csv;
  if (!log.empty()) {
    csv.open(log);
    if (!csv) throw Error("cannot write " + log);
  }
  const TrainResult result =
      train(state, data.train, options, log.empty() ? nullptr : &csv, [&](const LossRecord& r) {
        if (r.step % options.window == 0) {
          std::cout << "step " << r.step << "  L_c " << std::fixed << std::setprecision(4) << r.classification
                    << "  L_r " << r.reconstruction << "  total " << r.total << std::endl;
        }
      });
  save_checkpoint(state, out);
  std::cout << (result.converged ? "converged" : "reached max_steps") << " after " << state.step << " step(s)\n";
  if (!data.test.empty()) {
    std::cout << "held-out accuracy " << std::fixed << std::setprecision(4)
              << classification_accuracy(state.model, data.test) << '\n';
  }
  std::cout << "checkpoint " << checkpoint_hash(state) << " -> " << out << '\n';
  return kOk;
}

int cmd_generate(const std::string& model_path, const std::string& input, const std::string& labels,
                 const std::string& out, const std::string& json_out, uint64_t seed, bool no_chain, bool copy_columns,
                 bool verbose) {
  GenerationRequest req;
  try {
    req.labels = parse_label_list(labels);
  } catch (const Error& e) {
    throw UsageError(std::string("--labels: ") + e.what());
  }
  req.motif = motif_record_from_json(read_json_file(input), input).tokens;
  req.seed = seed;
  req.chaining = !no_chain;
  check_request(req);

  std::optional<ModelState> state;
  if (!model_path.empty()) state.emplace(load_checkpoint(model_path));
  GenerateOptions options;
  options.copy_columns = copy_columns;
  Diagnostics diag;
  const Piece piece = generate_piece(req, state ? &state->model : nullptr, options, &diag);
  render_midi_file(piece, out);
  if (!json_out.empty()) write_json_file(piece_to_json(piece), json_out);

  for (std::size_t i = 1; i < piece.motifs.size(); ++i) {
    const auto& m = piece.motifs[i];
    std::cout << "motif " << i << ": requested " << to_string(*m.requested) << ", verified "
              << (m.verified ? describe(*m.verified) : "None") << '\n';
  }
  std::cout << "wrote " << piece.motifs.size() << " motif(s) -> " << out << '\n';
  print_warnings(diag, verbose);
  return kOk;
}

int cmd_classify(const std::string& a_path, const std::string& b_path, const std::string& key_name, bool detail) {
  const TokenMatrix a = motif_record_from_json(read_json_file(a_path), a_path).tokens;
  const TokenMatrix b = motif_record_from_json(read_json_file(b_path), b_path).tokens;
  validate(a);
  validate(b);
  Key key;
  if (!key_name.empty()) {
    const auto k = parse_key(key_name);
    if (!k) throw UsageError("unknown key '" + key_name + "'");
    key = *k;
  } else {
    std::vector<Note> notes = detokenize(a, 0).notes;
    const auto nb = detokenize(b, 1).notes;
    notes.insert(notes.end(), nb.begin(), nb.end());
    key = infer_key(notes);
  }
  const RepetitionLabel label = classify_tokens(a, b, key);
  std::cout << (detail ? describe(label) : std::string(to_string(label.type))) << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset, const std::string& variant_name,
                 const std::string& out, uint64_t seed) {
  const Variant variant = variant_arg(variant_name);
  const ModelState state = load_checkpoint(model_path);
  const DatasetSplit data = read_dataset_dir(dataset);
  if (data.test.empty()) throw ValidityError(dataset, "test split is empty");
  EvalReport report = evaluate_variant(variant, state.model, data.test, seed);
  std::cout << format_report_table({report});
  if (!out.empty()) {
    json j = to_json(report);
    j["checkpoint_hash"] = checkpoint_hash(state);
    write_json_file(j, out);
  }
  return kOk;
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config_path, const std::string& checkpoint, int port) {
  ServiceConfig config = service_config_from_json(config_section(load_config(config_path), "service"));
  apply_env_overrides(config);
  if (!checkpoint.empty()) config.checkpoint = checkpoint;
  if (port >= 0) config.port = port;
  Service service(config);
  if (!config.checkpoint.empty()) service.load_model(config.checkpoint);
  HttpServer server(service);
  const int bound = server.bind(config.host, config.port);
  std::cout << "listening on http://" << config.host << ':' << bound
            << (service.model_loaded() ? "" : " (no model loaded)") << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motifrep: motif repetition analysis, training and generation"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "List every warning");

  std::string dir, out, config, input, a, b, key, labels, model, dataset, log, json_out, checkpoint;
  std::string variant = "RR";
  uint64_t seed = 0;
  int songs_per_class = 0, port = -1;
  long max_steps = 0;
  bool no_chain = false, copy_columns = false, detail = false;

  auto* ingest_cmd = app.add_subcommand("ingest", "Quantize, segment and tokenize a directory of MIDI files");
  ingest_cmd->add_option("midi-dir", dir, "Directory searched recursively for .mid/.midi")->required();
  ingest_cmd->add_option("-o,--output", out, "Motif JSON Lines file")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic repetition corpus as MIDI files");
  synth_cmd->add_option("-o,--output", out, "Output directory")->required();
  synth_cmd->add_option("-c,--config", config, "Config file ([synthetic] section)");
  synth_cmd->add_option("-n,--songs-per-class", songs_per_class, "Songs per repetition type");
  synth_cmd->add_option("--seed", seed, "Corpus seed");

  auto* build_cmd = app.add_subcommand("build-dataset", "Label motif pairs and split by song");
  build_cmd->add_option("motifs", input, "Motif JSON Lines file")->required();
  build_cmd->add_option("-c,--config", config, "Config file ([dataset] section)");
  build_cmd->add_option("-o,--output", out, "Dataset directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset directory");
  train_cmd->add_option("dataset-dir", dataset, "Dataset directory")->required();
  train_cmd->add_option("-c,--config", config, "Config file ([model] and [train] sections)");
  train_cmd->add_option("-o,--output", out, "Checkpoint path")->required();
  train_cmd->add_option("--variant", variant, "V, R or RR")->capture_default_str();
  train_cmd->add_option("--log", log, "Per-step loss CSV");
  train_cmd->add_option("--seed", seed, "Overrides the configured seed");
  train_cmd->add_option("--max-steps", max_steps, "Overrides the configured step limit");

  auto* gen_cmd = app.add_subcommand("generate", "Generate repetitions of a motif and render MIDI");
  gen_cmd->add_option("-m,--model", model, "Checkpoint (needed for SuR, HoR and SyR)");
  gen_cmd->add_option("-i,--input", input, "Motif JSON file")->required();
  gen_cmd->add_option("-l,--labels", labels, "Comma-separated steps, e.g. StR,TrR:-2,SyR")->required();
  gen_cmd->add_option("-o,--output", out, "MIDI output path")->required();
  gen_cmd->add_option("--json", json_out, "Also write the piece as JSON");
  gen_cmd->add_option("--seed", seed, "Generation seed");
  gen_cmd->add_flag("--no-chain", no_chain, "Derive every step from the input motif");
  gen_cmd->add_flag("--copy-columns", copy_columns, "Rule branches copy non-pitch columns from the input");

  auto* classify_cmd = app.add_subcommand("classify", "Print the repetition label of a motif pair");
  classify_cmd->add_option("-a", a, "Earlier motif JSON file")->required();
  classify_cmd->add_option("-b", b, "Later motif JSON file")->required();
  classify_cmd->add_option("-k,--key", key, "Key such as \"C major\" (inferred when omitted)");
  classify_cmd->add_flag("--detail", detail, "Print the sub-label, e.g. SyR (horizontal)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Matching rate of generated repetitions on the test split");
  eval_cmd->add_option("-m,--model", model, "Checkpoint")->required();
  eval_cmd->add_option("-d,--dataset", dataset, "Dataset directory")->required();
  eval_cmd->add_option("--variant", variant, "V, R or RR")->capture_default_str();
  eval_cmd->add_option("-o,--output", out, "Report JSON path");
  eval_cmd->add_option("--seed", seed, "Generation seed");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve_cmd->add_option("-c,--config", config, "Config file ([service] section)");
  serve_cmd->add_option("--checkpoint", checkpoint, "Overrides the configured checkpoint");
  serve_cmd->add_option("--port", port, "Overrides the configured port (0 picks a free port)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(dir, out, verbose);
    if (*synth_cmd) return cmd_synth(out, config, songs_per_class, seed);
    if (*build_cmd) return cmd_build_dataset(input, config, out, verbose);
    if (*train_cmd) return cmd_train(dataset, config, out, variant, log, seed, max_steps);
    if (*gen_cmd) return cmd_generate(model, input, labels, out, json_out, seed, no_chain, copy_columns, verbose);
    if (*classify_cmd) return cmd_classify(a, b, key, detail);
    if (*eval_cmd) return cmd_evaluate(model, dataset, variant, out, seed);
    if (*serve_cmd) return cmd_serve(config, checkpoint, port);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kCheckpoint;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const SchemaError& e) {
    std::cerr << "invalid input at " << e.path() << ": " << e.what() << '\n';
    return kInput;
  } catch (const ValidityError& e) {
    std::cerr << "invalid input at " << e.path() << ": " << e.what() << '\n';
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInput;
  } catch (const VocabularyError& e) {
    std::cerr << "invalid tokens: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
