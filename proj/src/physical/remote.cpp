#include "pnn/physical/remote.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <json.hpp>

#include "pnn/core/error.hpp"
#include "pnn/physical/protocol.hpp"

namespace pnn::physical {

using nlohmann::json;

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw InvalidSpec("endpoint must look like host:port, got '" + address + "'");
  }
  const std::string port_text = address.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidSpec("endpoint port is not a number: '" + port_text + "'");
  }
  if (port <= 0 || port > 65535) throw InvalidSpec("endpoint port out of range: " + port_text);
  return {address.substr(0, colon), static_cast<std::uint16_t>(port)};
}

RemoteSystem::RemoteSystem(const std::string& host, std::uint16_t port, int timeout_ms) : host_(host), port_(port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw BackendError("cannot resolve remote backend host '" + host + "'");
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw BackendError(std::string("socket: ") + std::strerror(errno));
  }
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  const int rc = ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    const std::string msg = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw BackendError("cannot connect to remote backend " + endpoint() + ": " + msg);
  }
  const std::uint64_t id = next_id_++;
  const json reply = json::parse(exchange(id, protocol::make_info_request(id)));
  if (!reply.contains("input_dim") || !reply.contains("output_dim") || !reply["input_dim"].is_number_integer() ||
      !reply["output_dim"].is_number_integer()) {
    throw BackendError("request " + std::to_string(id) + ": info reply lacks integer dimensions");
  }
  input_dim_ = reply["input_dim"].get<int>();
  output_dim_ = reply["output_dim"].get<int>();
  if (input_dim_ <= 0 || output_dim_ <= 0) {
    throw BackendError("request " + std::to_string(id) + ": remote reported non-positive dimensions");
  }
}

RemoteSystem::~RemoteSystem() {
  if (fd_ >= 0) ::close(fd_);
}

std::string RemoteSystem::exchange(std::uint64_t id, const std::string& request) const {
  const std::string tag = "request " + std::to_string(id) + " to " + endpoint();
  const std::string wire = request + "\n";
  std::size_t sent = 0;
  while (sent < wire.size()) {
    const ssize_t n = ::send(fd_, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw BackendError(tag + ": send failed: " + std::strerror(errno));
    sent += static_cast<std::size_t>(n);
  }
  char chunk[65536];
  std::size_t pos;
  while ((pos = pending_.find('\n')) == std::string::npos) {
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) throw BackendError(tag + ": timed out");
    if (n < 0) throw BackendError(tag + ": receive failed: " + std::strerror(errno));
    if (n == 0) throw BackendError(tag + ": connection closed by remote");
    pending_.append(chunk, static_cast<std::size_t>(n));
  }
  std::string line = pending_.substr(0, pos);
  pending_.erase(0, pos + 1);
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::parse_error&) {
    throw BackendError(tag + ": malformed response frame");
  }
  if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_unsigned() ||
      reply["id"].get<std::uint64_t>() != id) {
    throw BackendError(tag + ": response id does not match");
  }
  if (!reply.contains("ok") || !reply["ok"].is_boolean()) throw BackendError(tag + ": response lacks 'ok'");
  if (!reply["ok"].get<bool>()) {
    const std::string err = reply.contains("error") && reply["error"].is_string() ? reply["error"].get<std::string>()
                                                                                   : std::string("unknown error");
    throw BackendError(tag + ": remote error: " + err);
  }
  return line;
}

Matrix RemoteSystem::forward(const Matrix& x) const {
  check_forward_input(*this, x);
  if (x.rows() == 0) return Matrix(0, output_dim_);
  std::lock_guard<std::mutex> lock(mutex_);
  const std::uint64_t id = next_id_++;
  const json reply = json::parse(exchange(id, protocol::make_forward_request(id, x)));
  const std::string tag = "request " + std::to_string(id);
  if (!reply.contains("data") || !reply["data"].is_array()) throw BackendError(tag + ": forward reply lacks data");
  const json& data = reply["data"];
  if (static_cast<Eigen::Index>(data.size()) != x.rows()) {
    throw BackendError(tag + ": expected " + std::to_string(x.rows()) + " rows, got " + std::to_string(data.size()));
  }
  Matrix y(x.rows(), output_dim_);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const json& row = data[i];
    if (!row.is_array() || static_cast<int>(row.size()) != output_dim_) {
      throw BackendError(tag + ": row " + std::to_string(i) + " has the wrong width");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) throw BackendError(tag + ": non-numeric value in row " + std::to_string(i));
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  if (!y.allFinite()) throw BackendError(tag + ": remote returned non-finite values");
  return y;
}

}  // namespace pnn::physical
