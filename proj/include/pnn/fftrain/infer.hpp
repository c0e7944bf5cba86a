#pragma once

#include <vector>

#include "pnn/fftrain/network.hpp"

namespace pnn::fftrain {

struct GoodnessReport {
  Matrix per_layer;     // B x L, zero for excluded layers
  Vector accumulated;   // row sums over included layers
};

struct InferResult {
  std::vector<int> labels;
  Matrix scores;  // B x C accumulated goodness per candidate label
  std::vector<GoodnessReport> per_label;
};

// Runs already-labelled inputs x0 through every layer; returns y = W h per layer.
std::vector<Matrix> run_layers(const FfNetwork& net, const Matrix& x0);

// Accumulated-goodness classification. Every candidate label is embedded
// and propagated; the label with the highest accumulated goodness wins, ties
// going to the smaller label. An empty include_layers means all layers.
// Rows are processed in chunks of chunk_rows to bound memory.
InferResult infer(const FfNetwork& net, const Matrix& x, const std::vector<int>& include_layers = {},
                  Eigen::Index chunk_rows = 2000);

}  // namespace pnn::fftrain
