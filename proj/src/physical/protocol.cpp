#include "pnn/physical/protocol.hpp"

#include <json.hpp>

#include "pnn/core/error.hpp"

namespace pnn::physical::protocol {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_to_matrix(const json& data, int expected_cols) {
  if (!data.is_array() || data.empty()) throw ConsistencyError("data must be a non-empty array of rows");
  Matrix m(static_cast<Eigen::Index>(data.size()), expected_cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const json& row = data[i];
    if (!row.is_array() || static_cast<int>(row.size()) != expected_cols) {
      throw ConsistencyError("row " + std::to_string(i) + " must hold " + std::to_string(expected_cols) + " numbers");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) throw ConsistencyError("row " + std::to_string(i) + " has a non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  return m;
}

std::string error_response(const json& id, const std::string& msg) {
  return json{{"id", id}, {"ok", false}, {"error", msg}}.dump();
}

}  // namespace

std::string handle_request(const ForwardBackend& backend, const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::parse_error& e) {
    return error_response(nullptr, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error_response(nullptr, "request must be a JSON object");
  const json id = req.contains("id") ? req["id"] : json(nullptr);
  try {
    if (!req.contains("op") || !req["op"].is_string()) return error_response(id, "missing string field 'op'");
    const auto op = req["op"].get<std::string>();
    if (op == "info") {
      return json{{"id", id}, {"ok", true}, {"input_dim", backend.input_dim()}, {"output_dim", backend.output_dim()}}
          .dump();
    }
    if (op == "forward") {
      if (!req.contains("data")) return error_response(id, "forward request without 'data'");
      const Matrix x = json_to_matrix(req["data"], backend.input_dim());
      const Matrix y = backend.forward(x);
      return json{{"id", id}, {"ok", true}, {"data", matrix_to_json(y)}}.dump();
    }
    return error_response(id, "unknown op '" + op + "'");
  } catch (const std::exception& e) {
    return error_response(id, e.what());
  }
}

std::string make_info_request(std::uint64_t id) { return json{{"id", id}, {"op", "info"}}.dump(); }

std::string make_forward_request(std::uint64_t id, const Matrix& batch) {
  return json{{"id", id}, {"op", "forward"}, {"data", matrix_to_json(batch)}}.dump();
}

}  // namespace pnn::physical::protocol
