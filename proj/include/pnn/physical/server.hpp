#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

// Serves a backend over the line protocol. Each connection gets its own
// thread; the backend must be safe to call concurrently (simulators are).
class BackendServer {
 public:
  // port 0 picks an ephemeral port; see port().
  BackendServer(BackendPtr backend, const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  std::uint16_t port() const { return port_; }
  // Accept connections on a background thread.
  void start();
  // Accept connections on the calling thread until stop() is called.
  void run();
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  BackendPtr backend_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex conn_mutex_;
  std::list<std::thread> connections_;
};

}  // namespace pnn::physical
