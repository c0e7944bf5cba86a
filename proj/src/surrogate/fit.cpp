#include "pnn/surrogate/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnn/core/error.hpp"

namespace pnn::surrogate {

namespace {

struct LayerOptimizers {
  Adam w, b, gain, bias;
};

void adam_vector(Adam& opt, Vector& v, const Vector& g) {
  Eigen::Map<Matrix> vm(v.data(), v.size(), 1);
  opt.step(vm, Eigen::Map<const Matrix>(g.data(), g.size(), 1));
}

Matrix rows_of(const Matrix& m, const std::vector<Eigen::Index>& idx, std::size_t start, std::size_t count) {
  Matrix out(static_cast<Eigen::Index>(count), m.cols());
  for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[start + i]);
  return out;
}

}  // namespace

FitResult fit_surrogate(const Matrix& x, const Matrix& y, const FitConfig& cfg) {
  if (x.rows() != y.rows()) throw ConsistencyError("fit_surrogate: input and target counts differ");
  if (x.rows() < 10) throw InvalidSpec("fit_surrogate needs at least 10 pairs");
  if (!(cfg.val_frac > 0.0 && cfg.val_frac < 1.0)) throw InvalidSpec("val_frac must lie in (0, 1)");
  if (cfg.epochs < 0 || cfg.batch_size <= 0) throw InvalidSpec("epochs must be >= 0 and batch_size > 0");
  if (!x.allFinite() || !y.allFinite()) throw ConsistencyError("fit_surrogate: non-finite training data");

  Rng rng(cfg.seed);
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cfg.val_frac * static_cast<double>(n))), 1,
                                             n - 1);
  const auto n_train = n - n_val;
  const Matrix x_train = rows_of(x, order, 0, n_train), y_train = rows_of(y, order, 0, n_train);
  const Matrix x_val = rows_of(x, order, n_train, n_val), y_val = rows_of(y, order, n_train, n_val);

  std::vector<int> widths{static_cast<int>(x.cols())};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(static_cast<int>(y.cols()));
  FitResult result{Mlp(widths, rng, cfg.options), {}};
  Mlp& model = result.model;
  FitReport& report = result.report;

  const AdamConfig adam{cfg.lr};
  std::vector<LayerOptimizers> opts;
  for (const auto& layer : model.layers()) {
    opts.push_back({Adam(layer.w.rows(), layer.w.cols(), adam), Adam(layer.b.size(), 1, adam),
                    Adam(layer.ln_gain.size(), 1, adam), Adam(layer.ln_bias.size(), 1, adam)});
  }

  report.train_mse.push_back(mse(model.forward(x_train), y_train));
  report.val_mse.push_back(mse(model.forward(x_val), y_val));

  std::vector<Eigen::Index> batch_order(n_train);
  std::iota(batch_order.begin(), batch_order.end(), Eigen::Index{0});
  const auto bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n_train);
  Mlp::Gradients grads;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<Mlp::Layer> snapshot = model.layers();
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    bool finite = true;
    for (std::size_t start = 0; start < n_train; start += bs) {
      const std::size_t count = std::min(bs, n_train - start);
      const double loss = model.mse_step_gradients(rows_of(x_train, batch_order, start, count),
                                                   rows_of(y_train, batch_order, start, count), grads, &rng);
      if (!std::isfinite(loss)) {
        finite = false;
        break;
      }
      epoch_loss += loss * static_cast<double>(count);
      seen += count;
      for (std::size_t l = 0; l < opts.size(); ++l) {
        auto& layer = model.layers()[l];
        opts[l].w.step(layer.w, grads.layers[l].w);
        adam_vector(opts[l].b, layer.b, grads.layers[l].b);
        if (layer.ln_gain.size() > 0) {
          adam_vector(opts[l].gain, layer.ln_gain, grads.layers[l].ln_gain);
          adam_vector(opts[l].bias, layer.ln_bias, grads.layers[l].ln_bias);
        }
      }
    }
    const double val = finite ? mse(model.forward(x_val), y_val) : std::nan("");
    if (!finite || !std::isfinite(val)) {
      model.layers() = snapshot;
      report.diverged = true;
      report.message = "non-finite loss in epoch " + std::to_string(epoch) + "; kept parameters from epoch " +
                       std::to_string(epoch - 1);
      break;
    }
    report.train_mse.push_back(epoch_loss / static_cast<double>(seen));
    report.val_mse.push_back(val);
  }
  report.final_val_mse = report.val_mse.back();
  return result;
}

}  // namespace pnn::surrogate
