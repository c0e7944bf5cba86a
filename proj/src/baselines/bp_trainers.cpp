#include "pnn/baselines/bp_trainers.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "pnn/core/error.hpp"
#include "pnn/core/metrics.hpp"

namespace pnn::baselines {

namespace {

struct Snapshot {
  std::vector<BpLayer> layers;
  Matrix readout;
  Vector readout_bias;
  Adam readout_optimizer;
  Adam bias_optimizer;
};

Snapshot take(const BpNetwork& net) {
  return {net.layers, net.readout, net.readout_bias, net.readout_optimizer, net.bias_optimizer};
}

void restore(BpNetwork& net, Snapshot s) {
  net.layers = std::move(s.layers);
  net.readout = std::move(s.readout);
  net.readout_bias = std::move(s.readout_bias);
  net.readout_optimizer = std::move(s.readout_optimizer);
  net.bias_optimizer = std::move(s.bias_optimizer);
}

void check_relaxed(const BackwardBinding& binding, const BpConfig& cfg) {
  if (cfg.allow_relaxed_gradients) return;
  for (std::size_t l = 0; l < binding.size(); ++l) {
    if (binding[l] && binding[l]->kind() == "simulator:microwave") {
      throw ConfigError("layer " + std::to_string(l) +
                            " is a microwave system; BP through it needs allow_relaxed_gradients",
                        "allow_relaxed_gradients");
    }
  }
}

void set_optimizer_config(BpNetwork& net, const AdamConfig& adam) {
  for (auto& layer : net.layers) {
    if (layer.optimizer.first_moment().size() == 0) {
      layer.optimizer = Adam(layer.weights.rows(), layer.weights.cols(), adam);
    }
    layer.optimizer.set_config(adam);
  }
  if (net.readout_optimizer.first_moment().size() == 0) {
    net.readout_optimizer = Adam(net.readout.rows(), net.readout.cols(), adam);
    net.bias_optimizer = Adam(net.readout_bias.size(), 1, adam);
  }
  net.readout_optimizer.set_config(adam);
  net.bias_optimizer.set_config(adam);
}

}  // namespace

double bp_accuracy(const BpNetwork& net, const Dataset& data, std::size_t limit, ConfusionMatrix* confusion) {
  const Dataset subset = limit == 0 ? data : data.head(limit);
  const std::vector<int> preds = bp_predict(net, subset.features());
  const std::vector<int> labels = subset.labels();
  if (confusion != nullptr) *confusion = confusion_matrix(preds, labels, net.n_classes());
  return accuracy(preds, labels);
}

RunReport train_bp(BpNetwork& net, const BackwardBinding& binding, const Dataset& train, const Dataset* test,
                   const BpConfig& cfg, const BpRunOptions& options) {
  net.validate();
  if (binding.size() != net.layers.size()) {
    throw ConfigError("backward binding covers " + std::to_string(binding.size()) + " of " +
                          std::to_string(net.layers.size()) + " layers",
                      "backward_binding");
  }
  for (std::size_t l = 0; l < binding.size(); ++l) {
    if (!binding[l]) throw ConfigError("no backward model for layer " + std::to_string(l), "backward_binding");
  }
  check_relaxed(binding, cfg);
  if (cfg.epochs < 0) throw InvalidSpec("epochs must be non-negative");
  if (train.empty()) throw InvalidSpec("empty training set");
  if (train.dim != net.input_dim || train.n_classes != net.n_classes()) {
    throw ConsistencyError("training set shape (" + std::to_string(train.dim) + " features, " +
                           std::to_string(train.n_classes) + " classes) does not match the network");
  }
  if (!options.eval_backends.empty() && options.eval_backends.size() != net.layers.size()) {
    throw ConsistencyError("eval_backends must have one entry per layer");
  }
  set_optimizer_config(net, cfg.adam);

  RunReport report;
  report.method = options.method;
  Rng rng(cfg.seed);
  const Matrix x0 = net.prepare_input(train.features());
  const std::vector<int> labels = train.labels();
  const auto n = static_cast<std::size_t>(x0.rows());
  const std::size_t bs =
      cfg.batch_size <= 0 ? n : std::min(n, static_cast<std::size_t>(cfg.batch_size));
  const auto limit = static_cast<std::size_t>(std::max(0, cfg.train_eval_samples));
  const bool has_test = test != nullptr && !test->empty();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  BpGradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Snapshot snapshot = take(net);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    try {
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      int step = 0;
      for (std::size_t start = 0; start < n; start += bs, ++step) {
        const std::size_t count = std::min(bs, n - start);
        Matrix xb(static_cast<Eigen::Index>(count), x0.cols());
        std::vector<int> yb(count);
        for (std::size_t i = 0; i < count; ++i) {
          xb.row(static_cast<Eigen::Index>(i)) = x0.row(order[start + i]);
          yb[i] = labels[static_cast<std::size_t>(order[start + i])];
        }
        const double loss = bp_loss_and_gradients(net, binding, xb, yb, grads);
        if (!std::isfinite(loss)) {
          throw NumericalError("non-finite cross-entropy at epoch " + std::to_string(rec.epoch) + " step " +
                               std::to_string(step));
        }
        report.loss_trace.push_back({rec.epoch, -1, step, loss});
        loss_sum += loss;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          net.layers[l].optimizer.step(net.layers[l].weights, grads.weights[l]);
        }
        net.readout_optimizer.step(net.readout, grads.readout);
        net.bias_optimizer.step(net.readout_bias, grads.readout_bias);
      }
      rec.train_loss = loss_sum / static_cast<double>(step);

      const bool last = epoch + 1 == cfg.epochs;
      if (cfg.eval_every > 0 && (rec.epoch % cfg.eval_every == 0 || last)) {
        ConfusionMatrix cm_train, cm_test;
        if (options.eval_backends.empty()) {
          rec.train_accuracy = bp_accuracy(net, train, limit, &cm_train);
          if (has_test) rec.test_accuracy = bp_accuracy(net, *test, 0, &cm_test);
        } else {
          const BpNetwork real = with_backends(net, options.eval_backends);
          rec.train_accuracy = bp_accuracy(real, train, limit, &cm_train);
          rec.extra["twin_train_accuracy"] = bp_accuracy(net, train, limit);
          if (has_test) {
            rec.test_accuracy = bp_accuracy(real, *test, 0, &cm_test);
            rec.extra["twin_test_accuracy"] = bp_accuracy(net, *test, 0);
          }
        }
        if (last) {
          report.confusion["train"] = cm_train;
          report.summary["final_train_accuracy"] = rec.train_accuracy;
          if (has_test) {
            report.confusion["test"] = cm_test;
            report.summary["final_test_accuracy"] = rec.test_accuracy;
          }
          for (const auto& [k, v] : rec.extra) report.summary["final_" + k] = v;
        }
      }
    } catch (const BackendError& e) {
      restore(net, std::move(snapshot));
      report.status = "aborted";
      report.message = "epoch " + std::to_string(rec.epoch) + ": " + e.what();
      return report;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(net, rec);
  }
  return report;
}

RunReport train_ideal_bp(BpNetwork& net, const Dataset& train, const Dataset* test, const BpConfig& cfg,
                         const BpEpochCallback& on_epoch) {
  const BackwardBinding binding = exact_binding(net.backends());
  BpRunOptions options;
  options.method = "ideal-bp";
  options.on_epoch = on_epoch;
  return train_bp(net, binding, train, test, cfg, options);
}

RunReport train_in_silico(BpNetwork& net, const Dataset& train, const Dataset* test, const BpConfig& cfg,
                          double mismatch_sigma, std::uint64_t twin_seed, const BpEpochCallback& on_epoch) {
  if (!(mismatch_sigma >= 0.0)) throw InvalidSpec("mismatch_sigma must be non-negative");
  const std::vector<physical::BackendPtr> real = net.backends();
  std::vector<physical::BackendPtr> twins;
  for (std::size_t l = 0; l < real.size(); ++l) {
    twins.push_back(physical::clone_with_param_noise(*real[l], mismatch_sigma, twin_seed + l));
  }
  BpNetwork twin_net = with_backends(net, twins);
  BpRunOptions options;
  options.method = "in-silico";
  options.eval_backends = real;
  options.on_epoch = on_epoch;
  RunReport report = train_bp(twin_net, exact_binding(twins), train, test, cfg, options);
  net = with_backends(twin_net, real);
  return report;
}

RunReport train_pa_bp(BpNetwork& net, const BackwardBinding& binding, const Dataset& train, const Dataset* test,
                      const BpConfig& cfg, const BpEpochCallback& on_epoch) {
  BpRunOptions options;
  options.method = "pa-bp";
  options.on_epoch = on_epoch;
  return train_bp(net, binding, train, test, cfg, options);
}

}  // namespace pnn::baselines
