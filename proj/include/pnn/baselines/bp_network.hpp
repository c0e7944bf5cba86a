#pragma once

#include <span>
#include <vector>

#include "pnn/baselines/backward_model.hpp"
#include "pnn/core/adam.hpp"
#include "pnn/core/label_embed.hpp"
#include "pnn/fftrain/network.hpp"

namespace pnn::baselines {

struct BpLayer {
  physical::BackendPtr backend;
  Matrix weights;  // out x backend->output_dim()
  Adam optimizer;
};

// The forward-forward wiring with a linear softmax head on the normalised
// output of the last layer. No label is embedded: the label slots of the
// input layout stay zero, so the physical systems see inputs of the same
// width as in forward-forward training.
struct BpNetwork {
  std::vector<BpLayer> layers;
  Matrix readout;  // n_classes x last output width
  Vector readout_bias;
  Adam readout_optimizer;
  Adam bias_optimizer;
  bool skip = false;
  LabelEmbedSpec layout;
  double norm_eps = 1e-8;
  int input_dim = 0;

  int n_classes() const { return static_cast<int>(readout.rows()); }
  std::vector<physical::BackendPtr> backends() const;
  // Raw features -> physical input of the first layer.
  Matrix prepare_input(const Matrix& features) const;
  void validate() const;
};

// Same backends, wiring and initial weights as `ff`; the head is drawn
// N(0, 1/fan_in) with a zero bias.
BpNetwork bp_from_ff(const fftrain::FfNetwork& ff, const AdamConfig& adam, Rng& rng);

// Copy of `net` whose layer l runs on backends[l].
BpNetwork with_backends(const BpNetwork& net, const std::vector<physical::BackendPtr>& backends);

struct BpForward {
  std::vector<Matrix> inputs;  // physical input of each layer
  std::vector<Matrix> h;       // physical output
  std::vector<Matrix> y;       // h W^T
  Matrix z;                    // normalised last output
  Matrix logits;
};

BpForward bp_forward(const BpNetwork& net, const Matrix& x0);

struct BpGradients {
  std::vector<Matrix> weights;
  Matrix readout;
  Vector readout_bias;
};

// Mean softmax cross-entropy of the batch and its gradients. Physical
// layers are differentiated through binding[l] evaluated at the recorded
// inputs; the first layer's input gradient is never needed.
double bp_loss_and_gradients(const BpNetwork& net, const BackwardBinding& binding, const Matrix& x0,
                             std::span<const int> labels, BpGradients& grads);

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* dlogits = nullptr);

// Vector-Jacobian product of y -> y / (|y| + eps), row-wise.
Matrix normalize_direction_vjp(const Matrix& y, const Matrix& cotangent, double eps);

// Argmax of the logits, ties to the smaller class; chunked over rows.
std::vector<int> bp_predict(const BpNetwork& net, const Matrix& features, Eigen::Index chunk_rows = 2000);

}  // namespace pnn::baselines
