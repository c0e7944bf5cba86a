#include "pnn/fftrain/ff_loss.hpp"

#include <cmath>

#include "pnn/core/error.hpp"

namespace pnn::fftrain {

Vector goodness(const Matrix& y) { return y.rowwise().squaredNorm(); }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double ff_loss(double g_pos, double g_neg, double theta) { return softplus(-theta * (g_pos - g_neg)); }

LossAndGrad ff_loss_and_grad(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta) {
  if (h_pos.rows() != h_neg.rows() || h_pos.cols() != w.cols() || h_neg.cols() != w.cols()) {
    throw ConsistencyError("ff loss: W is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                           " but h_pos/h_neg are " + std::to_string(h_pos.rows()) + "x" +
                           std::to_string(h_pos.cols()) + " / " + std::to_string(h_neg.rows()) + "x" +
                           std::to_string(h_neg.cols()));
  }
  const auto b = h_pos.rows();
  if (b == 0) throw ConsistencyError("ff loss of an empty batch");
  Matrix y_pos = h_pos * w.transpose();
  Matrix y_neg = h_neg * w.transpose();
  const Vector g_pos = goodness(y_pos);
  const Vector g_neg = goodness(y_neg);
  LossAndGrad out;
  Vector s(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double z = theta * (g_pos(i) - g_neg(i));
    out.loss += softplus(-z);
    // d softplus(-z) / dz = -sigmoid(-z)
    s(i) = 0.5 * (1.0 + std::tanh(-0.5 * z));
  }
  out.loss /= static_cast<double>(b);
  y_pos.array().colwise() *= s.array();
  y_neg.array().colwise() *= s.array();
  out.grad.noalias() = y_pos.transpose() * h_pos;
  out.grad.noalias() -= y_neg.transpose() * h_neg;
  out.grad *= -2.0 * theta / static_cast<double>(b);
  return out;
}

Matrix ff_loss_grad(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta) {
  return ff_loss_and_grad(w, h_pos, h_neg, theta).grad;
}

double ff_batch_loss(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta) {
  const Vector g_pos = goodness(h_pos * w.transpose());
  const Vector g_neg = goodness(h_neg * w.transpose());
  double total = 0.0;
  for (Eigen::Index i = 0; i < g_pos.size(); ++i) total += ff_loss(g_pos(i), g_neg(i), theta);
  return total / static_cast<double>(g_pos.size());
}

Matrix normalize_direction(const Matrix& y, double eps) {
  if (!(eps > 0.0)) throw InvalidSpec("normalize_direction needs eps > 0");
  const Vector norms = y.rowwise().norm();
  return (y.array().colwise() / (norms.array() + eps)).matrix();
}

Matrix layer_input(int layer, const Matrix& prev_normed, const Matrix& x0, bool skip, double eps) {
  if (layer < 1) throw InvalidSpec("layer_input is defined for layers after the first");
  if (!skip) return prev_normed;
  if (prev_normed.rows() != x0.rows()) throw ConsistencyError("layer_input: batch sizes differ");
  Matrix out(prev_normed.rows(), prev_normed.cols() + x0.cols());
  out << prev_normed, normalize_direction(x0, eps);
  return out;
}

}  // namespace pnn::fftrain
