#pragma once

#include <string>

#include "pnn/physical/backend.hpp"

// Newline-delimited JSON over TCP, one object per line:
//   {"id": n, "op": "info"}                -> {"id": n, "ok": true, "input_dim": .., "output_dim": ..}
//   {"id": n, "op": "forward", "data": [[..], ..]} -> {"id": n, "ok": true, "data": [[..], ..]}
// Failures answer {"id": n, "ok": false, "error": "..."}; id is null when
// the request could not be parsed far enough to recover it.
namespace pnn::physical::protocol {

// Answers one request line (without the trailing newline). Never throws for
// bad input; the error is encoded in the response.
std::string handle_request(const ForwardBackend& backend, const std::string& line);

std::string make_info_request(std::uint64_t id);
std::string make_forward_request(std::uint64_t id, const Matrix& batch);

}  // namespace pnn::physical::protocol
