#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pnn/core/dataset.hpp"
#include "pnn/core/report.hpp"
#include "pnn/fftrain/network.hpp"

namespace pnn::fftrain {

struct MfffConfig {
  int epochs = 30;       // outer loop
  int n_inter = 16;      // optimizer steps per layer per epoch
  int batch_size = 500;  // rows per inner step; 0 or >= N uses the whole set
  AdamConfig adam;
  std::uint64_t seed = 0;
  int eval_every = 1;            // 0 disables per-epoch evaluation
  int train_eval_samples = 1000; // 0 evaluates on the full training set
  std::vector<int> include_layers;
};

struct TrainLayerResult {
  Matrix y_pos_normed;
  Matrix y_neg_normed;
  std::vector<double> loss_trace;  // loss of each step's minibatch before the update
};

// n_inter Adam steps on layer.weights against fixed physical outputs. The
// backend is not queried.
TrainLayerResult train_layer(FfLayer& layer, const Matrix& h_pos, const Matrix& h_neg, int n_inter, int batch_size,
                             double norm_eps, Rng& rng);

using EpochCallback = std::function<void(const FfNetwork&, const EpochRecord&)>;

// Each epoch draws fresh negative labels, then per layer issues exactly two
// batched forward calls (positive and negative data) and trains that layer.
// A BackendError ends the run with status "aborted" and the network restored
// to the last completed epoch.
RunReport train_mfff(FfNetwork& net, const Dataset& train, const Dataset* test, const MfffConfig& cfg,
                     const EpochCallback& on_epoch = {});

}  // namespace pnn::fftrain
