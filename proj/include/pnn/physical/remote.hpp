#pragma once

#include <cstdint>
#include <mutex>
#include <string>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

// Client side of the line protocol. Dimensions come from the "info"
// handshake performed in the constructor. Every failure (I/O, timeout,
// error response, shape mismatch) is a BackendError naming the request id.
class RemoteSystem final : public ForwardBackend {
 public:
  RemoteSystem(const std::string& host, std::uint16_t port, int timeout_ms = 30000);
  ~RemoteSystem() override;
  RemoteSystem(const RemoteSystem&) = delete;
  RemoteSystem& operator=(const RemoteSystem&) = delete;

  int input_dim() const override { return input_dim_; }
  int output_dim() const override { return output_dim_; }
  Matrix forward(const Matrix& x) const override;
  std::string kind() const override { return "remote"; }

  std::string endpoint() const { return host_ + ":" + std::to_string(port_); }

 private:
  std::string exchange(std::uint64_t id, const std::string& request) const;

  std::string host_;
  std::uint16_t port_;
  int fd_ = -1;
  int input_dim_ = 0;
  int output_dim_ = 0;
  mutable std::mutex mutex_;
  mutable std::uint64_t next_id_ = 1;
  mutable std::string pending_;
};

// Parses "host:port".
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& address);

}  // namespace pnn::physical
