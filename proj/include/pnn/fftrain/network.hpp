#pragma once

#include <vector>

#include "pnn/core/adam.hpp"
#include "pnn/core/label_embed.hpp"
#include "pnn/physical/backend.hpp"

namespace pnn::fftrain {

// A physical transformation followed by a trainable matrix: y = W h.
struct FfLayer {
  physical::BackendPtr backend;
  Matrix weights;  // out x backend->output_dim()
  Adam optimizer;
  double theta = 1.0;

  int output_dim() const { return static_cast<int>(weights.rows()); }
};

// Gaussian weights with std 1/sqrt(fan_in), fresh Adam state.
FfLayer make_ff_layer(physical::BackendPtr backend, int output_dim, double theta, const AdamConfig& adam, Rng& rng);

struct FfNetwork {
  std::vector<FfLayer> layers;
  bool skip = false;
  LabelEmbedSpec embed;
  double norm_eps = 1e-8;
  int input_dim = 0;  // raw feature dimension, before label embedding

  int embedded_dim() const { return embed.output_dim(input_dim); }
  int n_classes() const { return embed.n_classes; }
  // Physical input width that layer l must accept under the skip wiring.
  int expected_backend_input(std::size_t l) const;
  // ConfigError naming the layer and the expected/actual widths.
  void validate() const;
};

}  // namespace pnn::fftrain
