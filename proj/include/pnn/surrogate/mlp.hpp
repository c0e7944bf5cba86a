#pragma once

#include <string>
#include <vector>

#include "pnn/core/tensor.hpp"
#include "pnn/core/types.hpp"

namespace pnn::surrogate {

double silu(double u);
double silu_derivative(double u);

struct MlpOptions {
  bool layer_norm = false;  // on hidden pre-activations
  double dropout = 0.0;     // on hidden activations, training only
};

// Dense network: hidden layers are [LayerNorm] -> SiLU -> [dropout],
// the output layer is affine.
class Mlp {
 public:
  struct Layer {
    Matrix w;  // out x in
    Vector b;
    Vector ln_gain;  // empty without layer norm
    Vector ln_bias;
  };

  struct Gradients {
    std::vector<Layer> layers;
    Matrix input;  // B x input_dim
  };

  Mlp() = default;
  // widths = {input, hidden..., output}; weights N(0, 2 / fan_in), zero biases.
  Mlp(const std::vector<int>& widths, Rng& rng, MlpOptions options = {});

  int input_dim() const { return static_cast<int>(layers_.front().w.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().w.rows()); }
  const std::vector<int>& widths() const { return widths_; }
  const MlpOptions& options() const { return options_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Evaluation mode (no dropout).
  Matrix forward(const Matrix& x) const;

  // Gradients of sum(cotangent .* forward(x)) w.r.t. every parameter and the
  // input. With rng != nullptr and dropout > 0 a training-mode mask is drawn.
  Gradients backward(const Matrix& x, const Matrix& cotangent, Rng* rng = nullptr) const;

  // Training-mode forward + backward of the mean squared error.
  double mse_step_gradients(const Matrix& x, const Matrix& y, Gradients& grads, Rng* rng) const;

  std::vector<Tensor> to_tensors(const std::string& prefix) const;
  static Mlp from_tensors(const std::vector<Tensor>& tensors, const std::string& prefix);

 private:
  struct Cache;
  Matrix run(const Matrix& x, Cache* cache, Rng* rng) const;
  Gradients backprop(const Cache& cache, const Matrix& cotangent) const;

  std::vector<int> widths_;
  MlpOptions options_;
  std::vector<Layer> layers_;
};

// d(cotangent . mlp(x)) / dx, row-wise.
Matrix mlp_vjp(const Mlp& mlp, const Matrix& x, const Matrix& cotangent);

double mse(const Matrix& a, const Matrix& b);

}  // namespace pnn::surrogate
