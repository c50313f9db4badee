#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bnexplain/factor_graph.hpp"
#include "bnexplain/network.hpp"
#include "bnexplain/query.hpp"

namespace httplib {
class Server;
}

namespace bnexplain {

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Registry of immutable networks plus the JSON endpoints over it.
///
/// Routes:
///   GET  /health
///   POST /networks                  BIF text, or {"bif": "..."}
///   GET  /networks/{id}
///   GET  /networks/{id}/graph
///   POST /networks/{id}/query
///
/// Errors carry {code, message, detail}: 400 for bad input (including
/// impossible evidence), 404 for unknown ids or routes, 422 when a search
/// budget is exceeded, 500 otherwise.
class Service {
 public:
  explicit Service(std::chrono::milliseconds budget = std::chrono::seconds(30));

  /// Registers every *.bif file under `dir`, keyed by file stem.
  void load_directory(const std::filesystem::path& dir);

  /// Registers a network; generates "net-<n>" when no id is given.
  std::string add(BayesianNetwork bn, std::optional<std::string> id = std::nullopt);

  std::vector<std::string> ids() const;

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);
  ApiResponse upload(const std::string& body);

  /// Installs the routes on an httplib server.
  void mount(httplib::Server& server);

 private:
  struct Entry {
    BayesianNetwork bn;
    FactorGraph fg;
  };

  std::shared_ptr<const Entry> find(const std::string& id) const;

  std::chrono::milliseconds budget_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Entry>> registry_;
  std::size_t counter_ = 0;
};

/// Blocks serving `service` on host:port until the process is stopped.
/// Returns false when the socket cannot be bound.
bool serve(Service& service, const std::string& host, int port);

}  // namespace bnexplain
