#include "pnn/core/adam.hpp"

#include <cmath>

#include "pnn/core/error.hpp"

namespace pnn {

Adam::Adam(Eigen::Index rows, Eigen::Index cols, AdamConfig config)
    : config_(config), m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {}

void Adam::step(Eigen::Ref<Matrix> param, const Eigen::Ref<const Matrix>& grad) {
  if (param.rows() != m_.rows() || param.cols() != m_.cols() || grad.rows() != m_.rows() ||
      grad.cols() != m_.cols()) {
    throw ConsistencyError("Adam: parameter/gradient shape does not match optimizer state");
  }
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double lr = config_.lr;
  const double eps = config_.eps;
  param.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
}

void Adam::restore(Matrix m, Matrix v, long steps) {
  if (m.rows() != v.rows() || m.cols() != v.cols()) {
    throw ConsistencyError("Adam::restore: moment shapes differ");
  }
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = steps;
}

}  // namespace pnn
