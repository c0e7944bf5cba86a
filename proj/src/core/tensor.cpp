#include "pnn/core/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "pnn/core/error.hpp"

namespace pnn {

std::int64_t Tensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

Tensor to_tensor(std::string name, const Matrix& m) {
  Tensor t{std::move(name), {m.rows(), m.cols()}, false, {}};
  t.values.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), m.rows(), m.cols()) = m;
  return t;
}

Tensor to_tensor(std::string name, const CMatrix& m) {
  Tensor t{std::move(name), {m.rows(), m.cols()}, true, {}};
  t.values.reserve(static_cast<std::size_t>(m.size()) * 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.values.push_back(m(i, j).real());
      t.values.push_back(m(i, j).imag());
    }
  }
  return t;
}

Tensor to_tensor(std::string name, const Vector& v) {
  return Tensor{std::move(name), {v.size()}, false, std::vector<double>(v.data(), v.data() + v.size())};
}

Tensor scalar_tensor(std::string name, double value) {
  return Tensor{std::move(name), {}, false, {value}};
}

namespace {

void expect_shape(const Tensor& t, std::size_t rank, bool complex) {
  if (t.shape.size() != rank || t.is_complex != complex) {
    throw FormatError("tensor '" + t.name + "' has unexpected rank or dtype");
  }
  const auto expected = static_cast<std::size_t>(t.element_count()) * (complex ? 2 : 1);
  if (t.values.size() != expected) {
    throw FormatError("tensor '" + t.name + "' payload does not match its shape");
  }
}

}  // namespace

Matrix tensor_to_matrix(const Tensor& t) {
  expect_shape(t, 2, false);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), t.shape[0], t.shape[1]);
}

CMatrix tensor_to_cmatrix(const Tensor& t) {
  expect_shape(t, 2, true);
  CMatrix m(t.shape[0], t.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j, k += 2) m(i, j) = Complex(t.values[k], t.values[k + 1]);
  }
  return m;
}

Vector tensor_to_vector(const Tensor& t) {
  expect_shape(t, 1, false);
  return Eigen::Map<const Vector>(t.values.data(), t.shape[0]);
}

double tensor_to_scalar(const Tensor& t) {
  expect_shape(t, 0, false);
  return t.values.front();
}

const Tensor& find_tensor(const std::vector<Tensor>& tensors, const std::string& name) {
  auto it = std::find_if(tensors.begin(), tensors.end(), [&](const Tensor& t) { return t.name == name; });
  if (it == tensors.end()) throw FormatError("missing tensor '" + name + "'");
  return *it;
}

}  // namespace pnn
