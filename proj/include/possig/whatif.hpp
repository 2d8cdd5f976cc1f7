#pragma once

#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "possig/pitch.hpp"
#include "possig/predictor.hpp"
#include "possig/valuation.hpp"

namespace possig {

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

/// Everything a request is answered from. Immutable once loaded.
struct ServedModel {
  Checkpoint checkpoint;
  ValuationModels valuation;
  PitchPartition zones = default_zones();
  std::string checkpoint_sha256;
};

/// Prediction and hypothetical-action valuation for a possession in
/// progress. Handlers are pure functions of (model, request) and safe to
/// call concurrently.
class WhatIfService {
 public:
  WhatIfService() = default;
  explicit WhatIfService(ServedModel model);

  void load(ServedModel model);
  bool loaded() const;

  /// POST /v1/predict
  HttpReply predict(const std::string& body) const;
  HttpReply predict(const nlohmann::json& request) const;
  /// GET /v1/model/info
  HttpReply model_info() const;

 private:
  std::shared_ptr<const ServedModel> snapshot() const;

  mutable std::mutex mu_;
  std::shared_ptr<const ServedModel> model_;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

/// Loads a checkpoint plus xG/xT files into a ServedModel.
ServedModel load_served_model(const std::string& checkpoint_path, const std::string& xg_path,
                              const std::string& xt_path, const std::string& zones_path = "");

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  int timeout_seconds = 5;
};

/// HTTP front end for /v1/predict and /v1/model/info.
class HttpServer {
 public:
  HttpServer(const WhatIfService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port or -1.
  int bind();
  /// Serves until stop() is called.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and serves until the process is stopped. Returns false if the
/// socket cannot be bound.
bool run_server(const WhatIfService& service, const ServerOptions& options);

}  // namespace possig
