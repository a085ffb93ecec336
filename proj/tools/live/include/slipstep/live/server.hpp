#pragma once

// WebSocket transport for a Session. Network I/O runs on one thread; the
// simulation runs on another and owns the Session. They exchange messages
// through ordered queues only.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "slipstep/live/session.hpp"

namespace slipstep::live {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  double tick_rate_hz = 100.0;  // wall-clock pacing; 0 runs unpaced
  std::filesystem::path tape_path;  // written on shutdown when set
  bool handle_signals = false;      // stop on SIGINT / SIGTERM
};

class Server {
 public:
  /// Binds immediately. Throws IoError when the address or port is unavailable.
  Server(Session session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;

  /// Serves until stop() or a handled signal. Blocks.
  void run();
  /// Thread-safe.
  void stop();

  /// Ticks advanced so far (thread-safe).
  long ticks() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slipstep::live
