#pragma once

#include <memory>
#include <string>

#include "citywall/sync/endpoint.hpp"

namespace citywall::sync {

struct WebServerOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  // 0 picks an ephemeral port
  unsigned threads = 0;        // 0 = hardware concurrency
  bool handle_signals = false;  // SIGINT/SIGTERM end wait_for_shutdown_signal
};

// HTTP + WebSocket front door:
//   GET /layout   cached city layout JSON
//   GET /configs  JSON array of configuration ids
//   GET /healthz  200 once listening
//   GET /ws       WebSocket upgrade; text frames go to the ProtocolEndpoint.
//                 Optional ?roomId=..&deviceId=.. joins immediately.
class WebServer {
 public:
  WebServer(WebServerOptions options, ProtocolEndpoint& endpoint,
            std::string layout_json, std::string configs_json);
  ~WebServer();

  WebServer(const WebServer&) = delete;
  WebServer& operator=(const WebServer&) = delete;

  // Binds and starts the worker threads. Throws std::runtime_error when the
  // address cannot be bound.
  void start();
  unsigned short port() const;
  void stop();
  // Blocks until stop() is called or, with handle_signals, SIGINT/SIGTERM
  // arrives.
  void wait_for_shutdown_signal();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace citywall::sync
