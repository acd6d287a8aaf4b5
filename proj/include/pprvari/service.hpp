// service.hpp - HTTP/JSON session API under /v1
#ifndef PPRVARI_SERVICE_HPP
#define PPRVARI_SERVICE_HPP

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "pprvari/engine.hpp"

namespace pprvari::service {

struct Options {
  /// Default workspace for POST /v1/sessions without a "workspace" field.
  std::filesystem::path workspace;
  /// Write <workspace>/sessions/<id>.json after every mutation and reload
  /// those snapshots on startup.
  bool persist = false;
};

/// JSON views shared by the HTTP API and the CLI.
[[nodiscard]] nlohmann::json metric_json(const engine::SpaceMetric& m);
[[nodiscard]] nlohmann::json session_json(engine::StagedSession& s);

class Server {
 public:
  explicit Server(Options opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds host:port (0 picks a free port); returns the port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a successful bind.
  bool listen();
  void stop();
  void wait_until_ready() const;

  [[nodiscard]] std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pprvari::service

#endif  // PPRVARI_SERVICE_HPP
