#pragma once

#include <memory>
#include <string>

#include "slp/service.hpp"

namespace slp {

/// WebSocket front end for a SessionHub. Plain HTTP on the same port
/// answers GET /healthz and GET /scenarios.
class WsServer {
 public:
  /// Binds immediately; port 0 picks a free port.
  WsServer(SessionHub& hub, const std::string& address, unsigned short port);
  ~WsServer();

  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;

  unsigned short port() const;

  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop() or SIGINT/SIGTERM.
  void run();
  /// Stops accepting, drops every connection's subscription and joins.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slp
