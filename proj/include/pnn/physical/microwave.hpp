#pragma once

#include <cstdint>
#include <vector>

#include "pnn/physical/backend.hpp"

namespace pnn::physical {

// How real-valued inputs set the element phases. Binary thresholds at 0.5
// (what the metasurface can do); ContinuousPhase uses the value directly
// and is what the analytic gradient differentiates.
enum class PixelEncoding { Binary, ContinuousPhase };

struct MicrowaveSpec {
  int elements = 64;
  int input_dim = 40;
  int frequencies = 20;
  double eta = 0.7;
  double phase_on = 3.14159265358979323846;
  PixelEncoding encoding = PixelEncoding::Binary;
  std::uint64_t seed = 0;
};

// Reverberant cavity: t_f = u_f^T (I - eta A D(c))^-1 v_f, out_f = |t_f|^2,
// with D(c) = diag(exp(i phase_on c_k)) over the elements a pixel controls.
class MicrowaveSystem final : public Simulator {
 public:
  // pixel_map[m] is the input index driving element m, or -1 for a fixed
  // (untuned) element. u and v hold one column per frequency.
  MicrowaveSystem(CMatrix a, CMatrix u, CMatrix v, std::vector<int> pixel_map, int input_dim, double eta,
                  double phase_on = 3.14159265358979323846, PixelEncoding encoding = PixelEncoding::Binary);

  // A is drawn complex Gaussian and rescaled to unit spectral norm; the
  // first input_dim elements are tunable.
  static MicrowaveSystem random(const MicrowaveSpec& spec);

  int input_dim() const override { return input_dim_; }
  int output_dim() const override { return static_cast<int>(u_.cols()); }
  Matrix forward(const Matrix& c) const override;
  std::string kind() const override { return "microwave"; }

  // Gradient of the continuous-phase relaxation, whatever the encoding.
  Matrix vjp(const Matrix& c, const Matrix& cotangent) const override;
  std::unique_ptr<Simulator> perturbed(double mu, double sigma, std::uint64_t seed) const override;
  std::unique_ptr<Simulator> clone() const override;
  double parameter_std() const override;
  std::vector<Tensor> parameters(const std::string& prefix) const override;

  // Complex transfer values before intensity readout, B x F.
  CMatrix transfer(const Matrix& c) const;

  MicrowaveSystem with_encoding(PixelEncoding encoding) const;
  MicrowaveSystem with_eta(double eta) const;

  const CMatrix& coupling() const { return a_; }
  const CMatrix& u() const { return u_; }
  const CMatrix& v() const { return v_; }
  const std::vector<int>& pixel_map() const { return pixel_map_; }
  double eta() const { return eta_; }
  double phase_on() const { return phase_on_; }
  PixelEncoding encoding() const { return encoding_; }

 private:
  CVector element_phases(const Eigen::Ref<const Vector>& c, PixelEncoding enc) const;

  CMatrix a_;
  CMatrix u_;
  CMatrix v_;
  std::vector<int> pixel_map_;
  int input_dim_;
  double eta_;
  double phase_on_;
  PixelEncoding encoding_;
};

double spectral_norm(const CMatrix& m);

}  // namespace pnn::physical
