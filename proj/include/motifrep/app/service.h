/**
 * @file service.h
 * @brief HTTP/JSON service: classify, check, generate and model info over a read-only
 *        model loaded at startup.
 *
 * Handlers are plain functions of the request body so they can be exercised without a
 * socket; HttpServer binds them to routes.
 */

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "motifrep/model/trainer.h"

namespace motifrep {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string checkpoint;  // empty: start without a model (generate and model info answer 503)
  int max_motif_rows = kMaxRows;
  std::vector<std::string> cors_allowlist;  // "*" allows any origin
  int request_timeout_s = 30;
};

/// Reads the [service] section (or a flat file): host, port, checkpoint, max_motif_rows,
/// cors_allowlist, request_timeout_s.
ServiceConfig service_config_from_json(const nlohmann::json& j);
/// MOTIFREP_BIND ("host" or "host:port") and MOTIFREP_CHECKPOINT override the file.
void apply_env_overrides(ServiceConfig& config);

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Throws CheckpointError when the file is missing, corrupt or of another version.
  void load_model(const std::filesystem::path& path);
  bool model_loaded() const { return state_.has_value(); }
  const ServiceConfig& config() const { return config_; }

  /// {motif_a, motif_b, key?} -> {label, detail, key}
  HttpResponse classify(const std::string& body) const;
  /// {motif, candidate, expected?} -> {label, detail, key, matches?}
  HttpResponse check(const std::string& body) const;
  /// {motif, labels, t?, seed?, chaining?} -> {piece, labels, midi_base64}
  HttpResponse generate(const std::string& body) const;
  /// -> {config, variant, checkpoint_hash, step}
  HttpResponse model_info() const;

  /// Access-Control-Allow-Origin value for a request origin, empty when not allowed.
  std::string allowed_origin(const std::string& origin) const;

 private:
  ServiceConfig config_;
  std::optional<ModelState> state_;
  std::string hash_;
};

class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port. Throws on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace motifrep
