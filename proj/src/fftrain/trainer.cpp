#include "pnn/fftrain/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pnn/core/error.hpp"
#include "pnn/core/metrics.hpp"
#include "pnn/fftrain/ff_loss.hpp"
#include "pnn/fftrain/infer.hpp"

namespace pnn::fftrain {

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<Eigen::Index>& idx, std::size_t start, std::size_t count) {
  Matrix out(static_cast<Eigen::Index>(count), m.cols());
  for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[start + i]);
  return out;
}

double evaluate(const FfNetwork& net, const Dataset& data, std::size_t limit, const std::vector<int>& include,
                ConfusionMatrix* confusion) {
  const Dataset subset = limit == 0 ? data : data.head(limit);
  const InferResult r = infer(net, subset.features(), include);
  const std::vector<int> labels = subset.labels();
  if (confusion != nullptr) *confusion = confusion_matrix(r.labels, labels, net.n_classes());
  return accuracy(r.labels, labels);
}

}  // namespace

TrainLayerResult train_layer(FfLayer& layer, const Matrix& h_pos, const Matrix& h_neg, int n_inter, int batch_size,
                             double norm_eps, Rng& rng) {
  if (n_inter < 1) throw InvalidSpec("train_layer needs n_inter >= 1");
  const auto n = static_cast<std::size_t>(h_pos.rows());
  const bool full = batch_size <= 0 || static_cast<std::size_t>(batch_size) >= n;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (!full) std::shuffle(order.begin(), order.end(), rng);
  const std::size_t bs = full ? n : static_cast<std::size_t>(batch_size);

  TrainLayerResult out;
  out.loss_trace.reserve(static_cast<std::size_t>(n_inter));
  std::size_t cursor = 0;
  for (int step = 0; step < n_inter; ++step) {
    LossAndGrad lg;
    if (full) {
      lg = ff_loss_and_grad(layer.weights, h_pos, h_neg, layer.theta);
    } else {
      if (cursor + bs > n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      lg = ff_loss_and_grad(layer.weights, gather_rows(h_pos, order, cursor, bs), gather_rows(h_neg, order, cursor, bs),
                            layer.theta);
      cursor += bs;
    }
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite layer loss at inner step " << step << " (theta " << layer.theta << ", loss " << lg.loss
          << ", gradient norm " << lg.grad.norm() << ")";
      throw NumericalError(msg.str());
    }
    out.loss_trace.push_back(lg.loss);
    layer.optimizer.step(layer.weights, lg.grad);
  }
  out.y_pos_normed = normalize_direction(h_pos * layer.weights.transpose(), norm_eps);
  out.y_neg_normed = normalize_direction(h_neg * layer.weights.transpose(), norm_eps);
  return out;
}

RunReport train_mfff(FfNetwork& net, const Dataset& train, const Dataset* test, const MfffConfig& cfg,
                     const EpochCallback& on_epoch) {
  net.validate();
  if (cfg.epochs < 0) throw InvalidSpec("epochs must be non-negative");
  if (cfg.n_inter < 1) throw InvalidSpec("n_inter must be at least 1");
  if (train.empty()) throw InvalidSpec("empty training set");
  if (train.dim != net.input_dim || train.n_classes != net.n_classes()) {
    throw ConsistencyError("training set shape (" + std::to_string(train.dim) + " features, " +
                           std::to_string(train.n_classes) + " classes) does not match the network");
  }
  for (auto& layer : net.layers) layer.optimizer.set_config(cfg.adam);

  RunReport report;
  report.method = "mfff";
  Rng rng(cfg.seed);
  const Matrix features = train.features();
  const std::vector<int> labels = train.labels();
  const auto limit = static_cast<std::size_t>(std::max(0, cfg.train_eval_samples));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<FfLayer> snapshot = net.layers;
    EpochRecord rec;
    rec.epoch = epoch + 1;
    try {
      std::vector<int> neg(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) neg[i] = draw_negative_label(labels[i], net.n_classes(), rng);
      const Matrix x0_pos = embed_labels(features, labels, net.embed);
      const Matrix x0_neg = embed_labels(features, neg, net.embed);
      Matrix in_pos = x0_pos;
      Matrix in_neg = x0_neg;
      double loss_sum = 0.0;
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        FfLayer& layer = net.layers[l];
        const Matrix h_pos = layer.backend->forward(in_pos);
        const Matrix h_neg = layer.backend->forward(in_neg);
        TrainLayerResult r = train_layer(layer, h_pos, h_neg, cfg.n_inter, cfg.batch_size, net.norm_eps, rng);
        for (std::size_t s = 0; s < r.loss_trace.size(); ++s) {
          report.loss_trace.push_back({rec.epoch, static_cast<int>(l), static_cast<int>(s), r.loss_trace[s]});
        }
        loss_sum += std::accumulate(r.loss_trace.begin(), r.loss_trace.end(), 0.0) /
                    static_cast<double>(r.loss_trace.size());
        if (l + 1 < net.layers.size()) {
          const int next = static_cast<int>(l + 1);
          in_pos = layer_input(next, r.y_pos_normed, x0_pos, net.skip, net.norm_eps);
          in_neg = layer_input(next, r.y_neg_normed, x0_neg, net.skip, net.norm_eps);
        }
      }
      rec.train_loss = loss_sum / static_cast<double>(net.layers.size());
      const bool last = epoch + 1 == cfg.epochs;
      if (cfg.eval_every > 0 && (rec.epoch % cfg.eval_every == 0 || last)) {
        ConfusionMatrix cm_train, cm_test;
        rec.train_accuracy = evaluate(net, train, limit, cfg.include_layers, &cm_train);
        if (test != nullptr && !test->empty()) rec.test_accuracy = evaluate(net, *test, 0, cfg.include_layers, &cm_test);
        if (last) {
          report.confusion["train"] = cm_train;
          report.summary["final_train_accuracy"] = rec.train_accuracy;
          if (test != nullptr && !test->empty()) {
            report.confusion["test"] = cm_test;
            report.summary["final_test_accuracy"] = rec.test_accuracy;
          }
        }
      }
    } catch (const BackendError& e) {
      net.layers = snapshot;
      report.status = "aborted";
      report.message = "epoch " + std::to_string(rec.epoch) + ": " + e.what();
      return report;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(net, rec);
  }

  return report;
}

}  // namespace pnn::fftrain
