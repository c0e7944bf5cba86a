#include "pnn/fftrain/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pnn/core/error.hpp"

namespace pnn::fftrain {

FfLayer make_ff_layer(physical::BackendPtr backend, int output_dim, double theta, const AdamConfig& adam, Rng& rng) {
  if (!backend) throw InvalidSpec("layer needs a backend");
  if (output_dim <= 0) throw InvalidSpec("layer output_dim must be positive");
  const int fan_in = backend->output_dim();
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix w(output_dim, fan_in);
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = s * n01(rng);
  }
  FfLayer layer{std::move(backend), std::move(w), Adam(output_dim, fan_in, adam), theta};
  return layer;
}

int FfNetwork::expected_backend_input(std::size_t l) const {
  if (l == 0) return embedded_dim();
  const int prev = layers.at(l - 1).output_dim();
  return skip ? prev + embedded_dim() : prev;
}

void FfNetwork::validate() const {
  if (layers.empty()) throw ConfigError("network needs at least one layer", "depth");
  if (n_classes() < 2) throw ConfigError("forward-forward training needs at least two classes", "n_classes");
  try {
    embed.validate(input_dim);
  } catch (const InvalidSpec& e) {
    throw ConfigError(e.what(), "embed");
  }
  if (!(norm_eps > 0.0)) throw ConfigError("norm_eps must be positive", "norm_eps");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string where = "layers[" + std::to_string(l) + "]";
    if (!layer.backend) throw ConfigError(where + " has no backend", where);
    const int expected = expected_backend_input(l);
    if (layer.backend->input_dim() != expected) {
      throw ConfigError(where + ": backend expects input dimension " + std::to_string(layer.backend->input_dim()) +
                            " but the wiring delivers " + std::to_string(expected),
                        where);
    }
    if (layer.weights.cols() != layer.backend->output_dim() || layer.weights.rows() == 0) {
      throw ConfigError(where + ": weight matrix is " + std::to_string(layer.weights.rows()) + "x" +
                            std::to_string(layer.weights.cols()) + ", backend output is " +
                            std::to_string(layer.backend->output_dim()),
                        where);
    }
    if (!layer.weights.allFinite()) throw ConfigError(where + ": non-finite weights", where);
    if (!(layer.theta > 0.0)) throw ConfigError(where + ": theta must be positive", where);
  }
}

}  // namespace pnn::fftrain
