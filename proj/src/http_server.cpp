#include "evtab/http_server.hpp"

#include <chrono>

#include "httplib.h"

namespace evtab {

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_view(httplib::Response& res, const ViewModel& model) {
  res.status = 200;
  res.set_content(serialize(model), kJson);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFoundError& e) {
      send_json(res, {{"error", e.what()}}, 404);
    } catch (const InputError& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const nlohmann::json::exception& e) {
      send_json(res, {{"error", std::string("invalid JSON: ") + e.what()}}, 400);
    } catch (const IoError& e) {
      send_json(res, {{"error", e.what()}}, 500);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("request body is not valid JSON: ") + e.what());
  }
}

TimestampMs wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<SessionManager> sessions,
                       std::optional<std::filesystem::path> static_dir)
    : sessions_(std::move(sessions)), server_(std::make_unique<httplib::Server>()) {
  register_routes();
  if (static_dir && !server_->set_mount_point("/", static_dir->string()))
    throw IoError("cannot serve static files from '" + static_dir->string() + "'");
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::register_routes() {
  auto& srv = *server_;
  srv.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
            send_json(res, {{"status", "ok"}});
          }));

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = sessions_->create(session_source_from_json(parse_body(req)));
             send_json(res,
                       {{"session_id", session->id()},
                        {"candidates", session->candidates().size()},
                        {"history", session->history().size()},
                        {"view_state", to_json(session->view_state())}},
                       201);
           }));

  srv.Get(R"(/sessions/([^/]+)/view)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_view(res, sessions_->get(req.matches[1].str())->view());
          }));

  srv.Post(R"(/sessions/([^/]+)/commands)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = sessions_->get(req.matches[1].str());
             const nlohmann::json body = parse_body(req);
             if (!body.is_array()) {
               send_view(res, session->apply_command(body));
               return;
             }
             ViewModel model = session->view();
             for (const auto& command : body) model = session->apply_command(command);
             send_view(res, model);
           }));

  srv.Get(R"(/sessions/([^/]+)/similar-view)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_view(res, sessions_->get(req.matches[1].str())->similar_view());
          }));

  srv.Post(R"(/sessions/([^/]+)/state/([^/]+))",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto session = sessions_->get(req.matches[1].str());
             const SavedState state =
                 session->save_state(sessions_->store(), req.matches[2].str(), wall_clock_ms());
             send_json(res, to_json(state), 201);
           }));

  srv.Get(R"(/sessions/([^/]+)/state/([^/]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto session = sessions_->get(req.matches[1].str());
            send_view(res, session->load_state(sessions_->store(), req.matches[2].str()));
          }));
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind to " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace evtab
