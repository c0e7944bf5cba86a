#pragma once

#include <cstdint>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

// Multimode-fiber model: phase-encode the input, Fourier transform,
// multiply by the transmission matrix T, inverse transform, read intensity.
class OpticsSystem final : public Simulator {
 public:
  static constexpr double kDefaultPhaseGain = 3.14159265358979323846;

  OpticsSystem(CMatrix transmission, double phase_gain = kDefaultPhaseGain);

  // T with i.i.d. circular complex Gaussian entries of variance 1/dim.
  static OpticsSystem random(int dim, std::uint64_t seed, double phase_gain = kDefaultPhaseGain);

  int input_dim() const override { return static_cast<int>(t_.rows()); }
  int output_dim() const override { return static_cast<int>(t_.rows()); }
  Matrix forward(const Matrix& x) const override;
  std::string kind() const override { return "optics"; }

  Matrix vjp(const Matrix& x, const Matrix& cotangent) const override;
  std::unique_ptr<Simulator> perturbed(double mu, double sigma, std::uint64_t seed) const override;
  std::unique_ptr<Simulator> clone() const override;
  double parameter_std() const override;
  std::vector<Tensor> parameters(const std::string& prefix) const override;

  const CMatrix& transmission() const { return t_; }
  double phase_gain() const { return phase_gain_; }
  // IDFT * T * DFT, the full field-to-field map.
  const CMatrix& composite() const { return composite_; }

 private:
  CMatrix field(const Matrix& x) const;

  CMatrix t_;
  double phase_gain_;
  CMatrix composite_;
  CMatrix composite_t_;  // transpose, so a batch of rows maps as E * M^T
};

// Unitary DFT matrix F with F(j,k) = exp(-2 pi i j k / n) / sqrt(n), built with FFTW.
CMatrix unitary_dft_matrix(int n);

// Pooled standard deviation of the real and imaginary components.
double elementwise_std(const CMatrix& m);
double elementwise_std(const Matrix& m);

}  // namespace pnn::physical
