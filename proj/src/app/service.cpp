#include "motifrep/app/service.h"

#include <algorithm>
#include <cstdlib>

#include "motifrep/data/dataset.h"
#include "motifrep/error.h"
#include "motifrep/gen/generator.h"
#include "motifrep/model/checkpoint.h"

// After the Eigen-based headers: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include "httplib.h"

namespace motifrep {

using nlohmann::json;

namespace {

HttpResponse error_response(int status, const std::string& message, const std::string& path = "") {
  json err{{"status", status}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  return HttpResponse{status, json{{"error", err}}};
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw SchemaError("$ (byte " + std::to_string(e.byte) + ")", "malformed JSON");
  }
}

TokenMatrix motif_field(const json& j, const char* key, int max_rows) {
  const std::string path = std::string("$.") + key;
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  if (!j.contains(key)) throw SchemaError(path, "missing");
  TokenMatrix t = token_matrix_from_json(j.at(key), path);
  try {
    validate(t);
  } catch (const VocabularyError& e) {
    throw SchemaError(path + ".rows[" + std::to_string(e.row()) + "][" + std::to_string(e.attribute()) + "]", e.what());
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
  if (t.valid_len > max_rows) {
    throw ValidityError(path + ".valid_len", "motif longer than the " + std::to_string(max_rows) + "-row limit");
  }
  if (detokenize(t).notes.empty()) throw ValidityError(path, "motif has no notes");
  return t;
}

Key request_key(const json& j, const TokenMatrix& a, const TokenMatrix& b) {
  if (j.contains("key") && !j.at("key").is_null()) {
    const auto k = j.at("key").is_string() ? parse_key(j.at("key").get<std::string>()) : std::nullopt;
    if (!k) throw SchemaError("$.key", "expected a key name such as \"C major\"");
    return *k;
  }
  std::vector<Note> notes = detokenize(a, 0).notes;
  const auto nb = detokenize(b, 1).notes;
  notes.insert(notes.end(), nb.begin(), nb.end());
  return infer_key(notes);
}

json label_json(const RepetitionLabel& label, const Key& key) {
  return json{{"label", std::string(to_string(label.type))}, {"detail", label.detail()}, {"key", key.name()}};
}

/// Runs a handler body, mapping exception classes onto status codes.
template <typename F>
HttpResponse guarded(F&& f) {
  try {
    return f();
  } catch (const SchemaError& e) {
    return error_response(400, e.what(), e.path());
  } catch (const ValidityError& e) {
    return error_response(422, e.what(), e.path());
  } catch (const VocabularyError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

}  // namespace

ServiceConfig service_config_from_json(const json& j) {
  ServiceConfig c;
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("$.") + key, e.what());
    }
  };
  get("host", c.host);
  get("port", c.port);
  get("checkpoint", c.checkpoint);
  get("max_motif_rows", c.max_motif_rows);
  if (j.contains("cors_allowlist") && j.at("cors_allowlist").is_string()) {
    c.cors_allowlist = {j.at("cors_allowlist").get<std::string>()};
  } else {
    get("cors_allowlist", c.cors_allowlist);
  }
  get("request_timeout_s", c.request_timeout_s);
  if (c.port < 0 || c.port > 65535) throw SchemaError("$.port", "must lie in [0, 65535]");
  if (c.max_motif_rows < 1 || c.max_motif_rows > kMaxRows) throw SchemaError("$.max_motif_rows", "must lie in [1, 120]");
  if (c.request_timeout_s < 1) throw SchemaError("$.request_timeout_s", "must be >= 1");
  return c;
}

void apply_env_overrides(ServiceConfig& config) {
  if (const char* bind = std::getenv("MOTIFREP_BIND"); bind && *bind) {
    const std::string b(bind);
    const auto colon = b.rfind(':');
    if (colon == std::string::npos) {
      config.host = b;
    } else {
      config.host = b.substr(0, colon);
      try {
        config.port = std::stoi(b.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error("MOTIFREP_BIND: bad port in '" + b + "'");
      }
    }
  }
  if (const char* ckpt = std::getenv("MOTIFREP_CHECKPOINT"); ckpt && *ckpt) config.checkpoint = ckpt;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {}

void Service::load_model(const std::filesystem::path& path) {
  state_.emplace(load_checkpoint(path));
  hash_ = checkpoint_hash(*state_);
}

HttpResponse Service::classify(const std::string& body) const {
  return guarded([&] {
    const json j = parse_body(body);
    const TokenMatrix a = motif_field(j, "motif_a", config_.max_motif_rows);
    const TokenMatrix b = motif_field(j, "motif_b", config_.max_motif_rows);
    const Key key = request_key(j, a, b);
    return HttpResponse{200, label_json(classify_tokens(a, b, key), key)};
  });
}

HttpResponse Service::check(const std::string& body) const {
  return guarded([&] {
    const json j = parse_body(body);
    const TokenMatrix a = motif_field(j, "motif", config_.max_motif_rows);
    const TokenMatrix b = motif_field(j, "candidate", config_.max_motif_rows);
    const Key key = request_key(j, a, b);
    const RepetitionLabel label = classify_tokens(a, b, key);
    json out = label_json(label, key);
    if (j.contains("expected")) {
      const auto expected = j.at("expected").is_string() ? parse_repetition_type(j.at("expected").get<std::string>()) : std::nullopt;
      if (!expected || !is_trainable(*expected)) throw ValidityError("$.expected", "unknown repetition label");
      out["matches"] = label.type == *expected;
    }
    return HttpResponse{200, out};
  });
}

HttpResponse Service::generate(const std::string& body) const {
  if (!state_) return error_response(503, "no model loaded");
  return guarded([&] {
    const json j = parse_body(body);
    motif_field(j, "motif", config_.max_motif_rows);
    const GenerationRequest req = request_from_json(j);
    Diagnostics diag;
    GenerateOptions options;
    const Piece piece = generate_piece(req, &state_->model, options, &diag);
    const auto midi = render_midi(piece);
    json labels = json::array();
    for (const auto& m : piece.motifs) {
      labels.push_back(m.verified ? json(label_json(*m.verified, piece.key)) : json(nullptr));
    }
    return HttpResponse{200, json{{"piece", piece_to_json(piece)},
                                  {"labels", labels},
                                  {"warnings", diag.warnings()},
                                  {"midi_base64", httplib::detail::base64_encode(std::string(midi.begin(), midi.end()))}}};
  });
}

HttpResponse Service::model_info() const {
  if (!state_) return error_response(503, "no model loaded");
  return HttpResponse{200, json{{"config", to_json(state_->model.config())},
                                {"variant", std::string(to_string(state_->variant))},
                                {"checkpoint_hash", hash_},
                                {"step", state_->step}}};
}

std::string Service::allowed_origin(const std::string& origin) const {
  if (origin.empty()) return "";
  for (const auto& allowed : config_.cors_allowlist) {
    if (allowed == "*") return "*";
    if (allowed == origin) return origin;
  }
  return "";
}

struct HttpServer::Impl {
  explicit Impl(const Service& s) : service(s) {}
  const Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  const Service& svc = service;
  const auto timeout = svc.config().request_timeout_s;
  srv.set_read_timeout(timeout, 0);
  srv.set_write_timeout(timeout, 0);

  auto reply = [&svc](const httplib::Request& req, httplib::Response& res, const HttpResponse& out) {
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
    const std::string origin = svc.allowed_origin(req.get_header_value("Origin"));
    if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
  };
  srv.Post("/v1/classify", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, svc.classify(req.body));
  });
  srv.Post("/v1/check", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, svc.check(req.body));
  });
  srv.Post("/v1/generate", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, svc.generate(req.body));
  });
  srv.Get("/v1/model", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(req, res, svc.model_info());
  });
  srv.Options(R"(/v1/.*)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = svc.allowed_origin(req.get_header_value("Origin"));
    res.status = origin.empty() ? 403 : 204;
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace motifrep
