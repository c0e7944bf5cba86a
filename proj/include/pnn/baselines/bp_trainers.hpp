#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "pnn/baselines/bp_network.hpp"
#include "pnn/core/dataset.hpp"
#include "pnn/core/report.hpp"

namespace pnn::baselines {

struct BpConfig {
  int epochs = 30;
  int batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
  int eval_every = 1;
  int train_eval_samples = 1000;
  // Microwave layers only have gradients through their continuous
  // relaxation; BP through them must be asked for explicitly.
  bool allow_relaxed_gradients = false;
};

using BpEpochCallback = std::function<void(const BpNetwork&, const EpochRecord&)>;

struct BpRunOptions {
  std::string method = "bp";
  // When set, accuracies are measured on these systems and the accuracy on
  // the training systems goes to the "twin_*" extras.
  std::vector<physical::BackendPtr> eval_backends;
  BpEpochCallback on_epoch;
};

// Shared engine of all BP-family trainers: minibatch Adam on softmax
// cross-entropy with the forward pass through net's backends and the
// backward pass through `binding`. The loss trace records one entry per
// step with layer = -1. A BackendError ends the run with status "aborted"
// and the network restored to the last completed epoch.
RunReport train_bp(BpNetwork& net, const BackwardBinding& binding, const Dataset& train, const Dataset* test,
                   const BpConfig& cfg, const BpRunOptions& options = {});

// Forward and backward through the real simulators.
RunReport train_ideal_bp(BpNetwork& net, const Dataset& train, const Dataset* test, const BpConfig& cfg,
                         const BpEpochCallback& on_epoch = {});

// Trains on parameter-noise twins of net's systems and reports accuracy on
// the real ones. On return net holds the trained weights and still runs on
// the real systems.
RunReport train_in_silico(BpNetwork& net, const Dataset& train, const Dataset* test, const BpConfig& cfg,
                          double mismatch_sigma, std::uint64_t twin_seed, const BpEpochCallback& on_epoch = {});

// Forward through the real systems, backward through `binding` evaluated at
// the real activations.
RunReport train_pa_bp(BpNetwork& net, const BackwardBinding& binding, const Dataset& train, const Dataset* test,
                      const BpConfig& cfg, const BpEpochCallback& on_epoch = {});

double bp_accuracy(const BpNetwork& net, const Dataset& data, std::size_t limit = 0,
                   ConfusionMatrix* confusion = nullptr);

}  // namespace pnn::baselines
