#pragma once

#include <memory>
#include <optional>
#include <string>

#include "foodpair/recommend.hpp"

namespace httplib {
class Server;
}

namespace foodpair {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string checkpoint;
  std::string embeddings;
  std::string scores;
  std::string stats;
  std::optional<std::string> counts;
  std::optional<std::string> cors_allowed_origin;
};

// Parses the service JSON config; relative artifact paths resolve against
// the config file's directory.
ServiceConfig load_service_config(const std::string& path);

// Loads every artifact named in the config; throws on any failure.
PairingEngine load_engine(const ServiceConfig& config);

// Read-only JSON API over a shared engine:
//   GET  /api/health
//   GET  /api/ingredients?prefix=&limit=
//   GET  /api/score?a=&b=
//   GET  /api/rank?ingredient=&k=&filter=
//   POST /api/compare
class PairingService {
 public:
  PairingService(std::shared_ptr<const PairingEngine> engine,
                 std::optional<std::string> cors_allowed_origin = std::nullopt);
  ~PairingService();
  PairingService(const PairingService&) = delete;
  PairingService& operator=(const PairingService&) = delete;

  // Binds and blocks until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port; returns it (or -1). Serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  std::shared_ptr<const PairingEngine> engine_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace foodpair
