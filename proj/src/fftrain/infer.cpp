#include "pnn/fftrain/infer.hpp"

#include <algorithm>

#include "pnn/core/error.hpp"
#include "pnn/fftrain/ff_loss.hpp"

namespace pnn::fftrain {

std::vector<Matrix> run_layers(const FfNetwork& net, const Matrix& x0) {
  std::vector<Matrix> ys;
  ys.reserve(net.layers.size());
  Matrix input = x0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const FfLayer& layer = net.layers[l];
    const Matrix h = layer.backend->forward(input);
    ys.push_back(h * layer.weights.transpose());
    if (l + 1 < net.layers.size()) {
      input = layer_input(static_cast<int>(l + 1), normalize_direction(ys.back(), net.norm_eps), x0, net.skip,
                          net.norm_eps);
    }
  }
  return ys;
}

InferResult infer(const FfNetwork& net, const Matrix& x, const std::vector<int>& include_layers,
                  Eigen::Index chunk_rows) {
  const int n_layers = static_cast<int>(net.layers.size());
  const int n_classes = net.n_classes();
  if (x.cols() != net.input_dim) {
    throw ConsistencyError("infer: input dimension " + std::to_string(x.cols()) + ", network expects " +
                           std::to_string(net.input_dim));
  }
  std::vector<bool> use(static_cast<std::size_t>(n_layers), include_layers.empty());
  for (int l : include_layers) {
    if (l < 0 || l >= n_layers) throw InvalidSpec("infer: include_layers entry " + std::to_string(l) + " out of range");
    use[static_cast<std::size_t>(l)] = true;
  }
  const Eigen::Index b = x.rows();
  InferResult out;
  out.scores = Matrix::Zero(b, n_classes);
  out.per_label.assign(static_cast<std::size_t>(n_classes), GoodnessReport{Matrix::Zero(b, n_layers), Vector::Zero(b)});
  const Eigen::Index chunk = std::max<Eigen::Index>(1, chunk_rows);
  for (Eigen::Index start = 0; start < b; start += chunk) {
    const Eigen::Index rows = std::min(chunk, b - start);
    const Matrix xs = x.middleRows(start, rows);
    for (int c = 0; c < n_classes; ++c) {
      const std::vector<Matrix> ys = run_layers(net, embed_labels(xs, c, net.embed));
      GoodnessReport& rep = out.per_label[static_cast<std::size_t>(c)];
      for (int l = 0; l < n_layers; ++l) {
        rep.per_layer.block(start, l, rows, 1) = goodness(ys[static_cast<std::size_t>(l)]);
        if (!use[static_cast<std::size_t>(l)]) rep.per_layer.block(start, l, rows, 1).setZero();
      }
      rep.accumulated.segment(start, rows) = rep.per_layer.middleRows(start, rows).rowwise().sum();
      out.scores.block(start, c, rows, 1) = rep.accumulated.segment(start, rows);
    }
  }
  out.labels.resize(static_cast<std::size_t>(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    int best = 0;
    for (int c = 1; c < n_classes; ++c) {
      if (out.scores(i, c) > out.scores(i, best)) best = c;
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace pnn::fftrain
