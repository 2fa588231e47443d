#include "semtex/api/server.hpp"

#include "httplib.h"
#include "semtex/core/error.hpp"

namespace semtex::api {

struct Server::Impl {
  Service& service;
  httplib::Server http;
  bool bound = false;

  explicit Impl(Service& s) : service(s) {}
};

namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
  if (r.content_type == "image/png" && r.status == 200) {
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
  }
}

}  // namespace

Server::Server(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& http = impl_->http;
  Service& svc = impl_->service;
  // The library default sets SO_REUSEPORT, which would let a second server
  // share a port that is already in use.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  http.Get("/api/health", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
  http.Get("/api/attributes",
           [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.attributes()); });
  http.Post("/api/generate",
            [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.generate(req.body)); });
  http.Get(R"(/api/texture/([0-9A-Za-z]+)\.png)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.texture(req.matches[1].str()));
  });
  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) res.set_content(R"({"error": "not found"})", "application/json");
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else if (impl_->http.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void Server::listen() {
  if (!impl_->bound) throw InvalidInput("server is not bound");
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

bool Server::running() const { return impl_->http.is_running(); }

}  // namespace semtex::api
