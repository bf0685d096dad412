#pragma once

// Subprocess and WebSocket helpers for tests that drive the real binary.

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace citywall::testing {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the citywall binary built alongside the tests.
CliResult run_cli(const std::vector<std::string>& args);

std::string citywall_binary();
std::string data_dir();
std::string read_text(const std::string& path);

// `citywall serve` on an ephemeral port, stopped with SIGTERM on destruction.
class ServeProcess {
 public:
  explicit ServeProcess(std::vector<std::string> extra_args);
  ~ServeProcess();
  ServeProcess(const ServeProcess&) = delete;
  ServeProcess& operator=(const ServeProcess&) = delete;

  unsigned short port() const noexcept { return port_; }
  // Sends SIGTERM and returns the exit code.
  int stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
};

// Plain HTTP GET against localhost; returns {status, body}.
std::pair<int, std::string> http_get(unsigned short port, const std::string& target);

// Blocking WebSocket client with per-read timeouts.
class WsClient {
 public:
  explicit WsClient(unsigned short port, const std::string& target = "/ws");
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const nlohmann::json& message);
  void send_text(const std::string& text);
  // Throws std::runtime_error on timeout or a closed connection.
  nlohmann::json read(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
  // Reads until a message with the given event arrives; earlier ones are
  // discarded.
  nlohmann::json read_event(const std::string& event,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace citywall::testing
