#pragma once

#include <cstdint>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

struct AcousticSpec {
  int input_dim = 20;
  int channels = 20;
  int output_dim = 20;
  // Mixing weights are drawn N(0, weight_scale^2 / fan_in).
  double weight_scale = 1.0;
  // Per-channel gain and exponent, cycled when shorter than `channels`.
  std::vector<double> gains = {5.7, 5.5, 5.3, 5.6};
  std::vector<double> exponents = {1.6, 1.7, 1.5, 1.4};
  std::uint64_t seed = 0;
};

// Loudspeaker array with a power-law control law:
// out = W_out phi(W_in x), phi(u)_k = G_k sign(u_k) |u_k|^alpha_k.
class AcousticSystem final : public Simulator {
 public:
  AcousticSystem(Matrix w_in, Matrix w_out, Vector gains, Vector exponents);
  static AcousticSystem random(const AcousticSpec& spec);

  int input_dim() const override { return static_cast<int>(w_in_.cols()); }
  int output_dim() const override { return static_cast<int>(w_out_.rows()); }
  Matrix forward(const Matrix& x) const override;
  std::string kind() const override { return "acoustic"; }

  // At u = 0 the derivative is G for alpha = 1 and the subgradient 0 for alpha < 1.
  Matrix vjp(const Matrix& x, const Matrix& cotangent) const override;
  std::unique_ptr<Simulator> perturbed(double mu, double sigma, std::uint64_t seed) const override;
  std::unique_ptr<Simulator> clone() const override;
  double parameter_std() const override;
  std::vector<Tensor> parameters(const std::string& prefix) const override;

  const Matrix& w_in() const { return w_in_; }
  const Matrix& w_out() const { return w_out_; }
  const Vector& gains() const { return gains_; }
  const Vector& exponents() const { return exponents_; }

  static double control_law(double u, double gain, double alpha);
  static double control_law_derivative(double u, double gain, double alpha);

 private:
  Matrix w_in_;   // channels x input_dim
  Matrix w_out_;  // output_dim x channels
  Vector gains_;
  Vector exponents_;
};

}  // namespace pnn::physical
