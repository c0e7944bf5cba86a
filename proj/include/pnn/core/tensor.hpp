#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnn/core/types.hpp"

namespace pnn {

// A named float64 / complex128 array in row-major order. Complex values
// are stored interleaved (re, im).
struct Tensor {
  std::string name;
  std::vector<std::int64_t> shape;
  bool is_complex = false;
  std::vector<double> values;

  std::int64_t element_count() const;
  std::size_t byte_size() const { return values.size() * sizeof(double); }
  bool operator==(const Tensor&) const = default;
};

Tensor to_tensor(std::string name, const Matrix& m);
Tensor to_tensor(std::string name, const CMatrix& m);
Tensor to_tensor(std::string name, const Vector& v);
Tensor scalar_tensor(std::string name, double value);

Matrix tensor_to_matrix(const Tensor& t);
CMatrix tensor_to_cmatrix(const Tensor& t);
Vector tensor_to_vector(const Tensor& t);
double tensor_to_scalar(const Tensor& t);

const Tensor& find_tensor(const std::vector<Tensor>& tensors, const std::string& name);

}  // namespace pnn
