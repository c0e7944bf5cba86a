#pragma once

#include <cstdint>
#include <vector>

#include "pnn/baselines/bp_network.hpp"
#include "pnn/fftrain/network.hpp"
#include "pnn/harness/config.hpp"

namespace pnn::harness {

struct TaskData {
  Dataset train;
  Dataset test;
};

// MNIST from the configured IDX directory (cropped, pooled, truncated) or
// freshly generated synthetic vowels.
TaskData load_task(const ExperimentConfig& cfg);

// Average pooling of square images stored row-major; trailing rows and
// columns that do not fill a block are dropped.
Dataset pool_images(const Dataset& data, int factor);

struct LayerShapes {
  std::vector<int> backend_input;
  std::vector<int> backend_output;
  std::vector<int> width;  // trainable output width
};

// Builds one backend per layer. Simulated layer l uses seed backend.seed + l;
// remote layers are checked against the widths the wiring needs.
std::vector<physical::BackendPtr> build_backends(const ExperimentConfig& cfg, int input_dim);

// The simulator of one layer given its physical input width.
physical::SimulatorPtr build_simulator(const ExperimentConfig& cfg, int layer, int input_width);

LayerShapes layer_shapes(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends);

// Weights come from Rng(seed); the BP network is derived from the same
// draw so both families start from identical weights.
fftrain::FfNetwork build_ff_network(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends,
                                    int input_dim, std::uint64_t seed);
baselines::BpNetwork build_bp_network(const ExperimentConfig& cfg, const std::vector<physical::BackendPtr>& backends,
                                      int input_dim, std::uint64_t seed);

}  // namespace pnn::harness
