#pragma once

#include <memory>
#include <string>

#include "semtex/api/service.hpp"

namespace semtex::api {

/// HTTP front for a Service, with permissive CORS headers for the dev UI.
class Server {
 public:
  explicit Server(Service& service);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  /// Throws IoError when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires a successful bind.
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace semtex::api
