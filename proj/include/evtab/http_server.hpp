#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "evtab/session.hpp"

namespace httplib {
class Server;
}

namespace evtab {

/// JSON-over-HTTP front end for a SessionManager.
///
///   POST /sessions                      create a session
///   GET  /sessions/{id}/view            main view model
///   POST /sessions/{id}/commands        apply one command (or an array, in order)
///   GET  /sessions/{id}/similar-view    linked similar-items view model
///   POST /sessions/{id}/state/{name}    save the main view state
///   GET  /sessions/{id}/state/{name}    restore a saved state
///   GET  /healthz
///
/// Errors return {"error": message} with 400 (bad input), 404 (unknown
/// session, item or state) or 500 (storage failure).
class HttpServer {
 public:
  HttpServer(std::shared_ptr<SessionManager> sessions,
             std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to `host`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();

  SessionManager& sessions() { return *sessions_; }

 private:
  void register_routes();

  std::shared_ptr<SessionManager> sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace evtab
