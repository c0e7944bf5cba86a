#include "pnn/baselines/bp_network.hpp"

#include <algorithm>
#include <cmath>

#include "pnn/core/error.hpp"
#include "pnn/fftrain/ff_loss.hpp"

namespace pnn::baselines {

std::vector<physical::BackendPtr> BpNetwork::backends() const {
  std::vector<physical::BackendPtr> out;
  for (const auto& layer : layers) out.push_back(layer.backend);
  return out;
}

Matrix BpNetwork::prepare_input(const Matrix& features) const {
  if (features.cols() != input_dim) {
    throw ConsistencyError("BP input has " + std::to_string(features.cols()) + " features, network expects " +
                           std::to_string(input_dim));
  }
  const int width = layout.output_dim(input_dim);
  Matrix x0 = Matrix::Zero(features.rows(), width);
  x0.leftCols(input_dim) = features;
  if (layout.mode == EmbedMode::Overwrite) x0.middleCols(layout.slot_offset, layout.n_classes).setZero();
  return x0;
}

void BpNetwork::validate() const {
  if (layers.empty()) throw ConfigError("a network needs at least one layer", "depth");
  const int x0_width = layout.output_dim(input_dim);
  int prev = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const BpLayer& layer = layers[l];
    const std::string field = "layers[" + std::to_string(l) + "]";
    if (!layer.backend) throw ConfigError("missing backend", field);
    const int expected = l == 0 ? x0_width : prev + (skip ? x0_width : 0);
    if (layer.backend->input_dim() != expected) {
      throw ConfigError(field + ": backend takes " + std::to_string(layer.backend->input_dim()) +
                            " inputs, the wiring supplies " + std::to_string(expected),
                        field);
    }
    if (layer.weights.cols() != layer.backend->output_dim()) {
      throw ConfigError(field + ": weight columns do not match the backend output", field);
    }
    prev = static_cast<int>(layer.weights.rows());
  }
  if (readout.cols() != prev || readout_bias.size() != readout.rows() || readout.rows() != layout.n_classes) {
    throw ConfigError("readout shape does not match the last layer and class count", "readout");
  }
}

BpNetwork bp_from_ff(const fftrain::FfNetwork& ff, const AdamConfig& adam, Rng& rng) {
  BpNetwork net;
  for (const auto& layer : ff.layers) {
    net.layers.push_back({layer.backend, layer.weights, Adam(layer.weights.rows(), layer.weights.cols(), adam)});
  }
  net.skip = ff.skip;
  net.layout = ff.embed;
  net.norm_eps = ff.norm_eps;
  net.input_dim = ff.input_dim;
  const Eigen::Index c = ff.n_classes();
  const Eigen::Index fan_in = ff.layers.empty() ? 0 : ff.layers.back().weights.rows();
  std::normal_distribution<double> n01;
  net.readout.resize(c, fan_in);
  const double scale = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
  for (auto& v : net.readout.reshaped()) v = scale * n01(rng);
  net.readout_bias = Vector::Zero(c);
  net.readout_optimizer = Adam(c, fan_in, adam);
  net.bias_optimizer = Adam(c, 1, adam);
  return net;
}

BpNetwork with_backends(const BpNetwork& net, const std::vector<physical::BackendPtr>& backends) {
  if (backends.size() != net.layers.size()) throw ConsistencyError("with_backends: one backend per layer");
  BpNetwork out = net;
  for (std::size_t l = 0; l < backends.size(); ++l) out.layers[l].backend = backends[l];
  return out;
}

BpForward bp_forward(const BpNetwork& net, const Matrix& x0) {
  BpForward f;
  Matrix input = x0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const BpLayer& layer = net.layers[l];
    f.inputs.push_back(input);
    f.h.push_back(layer.backend->forward(input));
    f.y.push_back(f.h.back() * layer.weights.transpose());
    const Matrix z = fftrain::normalize_direction(f.y.back(), net.norm_eps);
    if (l + 1 < net.layers.size()) {
      input = fftrain::layer_input(static_cast<int>(l + 1), z, x0, net.skip, net.norm_eps);
    } else {
      f.z = z;
    }
  }
  f.logits = (f.z * net.readout.transpose()).rowwise() + net.readout_bias.transpose();
  return f;
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* dlogits) {
  const Eigen::Index b = logits.rows();
  if (static_cast<std::size_t>(b) != labels.size()) throw ConsistencyError("logits and labels differ in length");
  if (b == 0) throw InvalidSpec("softmax_cross_entropy on an empty batch");
  if (dlogits != nullptr) dlogits->resize(b, logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw std::out_of_range("label " + std::to_string(y) + " out of range");
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double sum = e.sum();
    loss += std::log(sum) + m - logits(i, y);
    if (dlogits != nullptr) {
      dlogits->row(i) = e / sum;
      (*dlogits)(i, y) -= 1.0;
    }
  }
  if (dlogits != nullptr) *dlogits /= static_cast<double>(b);
  return loss / static_cast<double>(b);
}

Matrix normalize_direction_vjp(const Matrix& y, const Matrix& cotangent, double eps) {
  Matrix out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double n = y.row(i).norm();
    const double d = n + eps;
    out.row(i) = cotangent.row(i) / d;
    if (n > 0.0) out.row(i) -= y.row(i) * (y.row(i).dot(cotangent.row(i)) / (n * d * d));
  }
  return out;
}

double bp_loss_and_gradients(const BpNetwork& net, const BackwardBinding& binding, const Matrix& x0,
                             std::span<const int> labels, BpGradients& grads) {
  if (binding.size() != net.layers.size()) {
    throw ConfigError("backward binding covers " + std::to_string(binding.size()) + " of " +
                          std::to_string(net.layers.size()) + " layers",
                      "backward_binding");
  }
  const BpForward f = bp_forward(net, x0);
  Matrix dlogits;
  const double loss = softmax_cross_entropy(f.logits, labels, &dlogits);
  grads.readout = dlogits.transpose() * f.z;
  grads.readout_bias = dlogits.colwise().sum().transpose();
  grads.weights.resize(net.layers.size());

  Matrix dz = dlogits * net.readout;
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const Matrix dy = normalize_direction_vjp(f.y[k], dz, net.norm_eps);
    grads.weights[k] = dy.transpose() * f.h[k];
    if (k == 0) break;
    const Matrix dh = dy * net.layers[k].weights;
    const Matrix din = binding[k]->vjp(f.inputs[k], dh);
    // with skip on, the trailing columns belong to the fixed raw input
    dz = din.leftCols(net.layers[k - 1].weights.rows());
  }
  return loss;
}

std::vector<int> bp_predict(const BpNetwork& net, const Matrix& features, Eigen::Index chunk_rows) {
  if (chunk_rows < 1) throw InvalidSpec("chunk_rows must be positive");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index start = 0; start < features.rows(); start += chunk_rows) {
    const Eigen::Index n = std::min(chunk_rows, features.rows() - start);
    const BpForward f = bp_forward(net, net.prepare_input(features.middleRows(start, n)));
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      for (int c = 1; c < f.logits.cols(); ++c) {
        if (f.logits(i, c) > f.logits(i, arg)) arg = c;
      }
      out.push_back(arg);
    }
  }
  return out;
}

}  // namespace pnn::baselines
