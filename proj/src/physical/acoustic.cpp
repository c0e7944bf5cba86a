#include "pnn/physical/acoustic.hpp"

#include <cmath>
#include <random>

#include "pnn/core/error.hpp"
#include "pnn/physical/optics.hpp"

namespace pnn::physical {

AcousticSystem::AcousticSystem(Matrix w_in, Matrix w_out, Vector gains, Vector exponents)
    : w_in_(std::move(w_in)), w_out_(std::move(w_out)), gains_(std::move(gains)), exponents_(std::move(exponents)) {
  const auto channels = w_in_.rows();
  if (channels == 0 || w_in_.cols() == 0 || w_out_.rows() == 0) {
    throw InvalidSpec("acoustic system dimensions must be positive");
  }
  if (w_out_.cols() != channels || gains_.size() != channels || exponents_.size() != channels) {
    throw InvalidSpec("acoustic W_in, W_out, gains and exponents disagree on the channel count");
  }
  if (!w_in_.allFinite() || !w_out_.allFinite() || !gains_.allFinite() || !exponents_.allFinite()) {
    throw InvalidSpec("acoustic parameters must be finite");
  }
  if ((exponents_.array() <= 0.0).any()) throw InvalidSpec("acoustic exponents must be positive");
}

AcousticSystem AcousticSystem::random(const AcousticSpec& spec) {
  if (spec.input_dim <= 0 || spec.channels <= 0 || spec.output_dim <= 0) {
    throw InvalidSpec("acoustic dimensions must be positive");
  }
  if (spec.gains.empty() || spec.exponents.empty()) throw InvalidSpec("acoustic gains/exponents must be non-empty");
  Rng rng(spec.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix w_in(spec.channels, spec.input_dim);
  const double s_in = spec.weight_scale / std::sqrt(static_cast<double>(spec.input_dim));
  for (Eigen::Index i = 0; i < w_in.size(); ++i) w_in.data()[i] = s_in * n01(rng);
  Matrix w_out(spec.output_dim, spec.channels);
  const double s_out = spec.weight_scale / std::sqrt(static_cast<double>(spec.channels));
  for (Eigen::Index i = 0; i < w_out.size(); ++i) w_out.data()[i] = s_out * n01(rng);
  Vector g(spec.channels), a(spec.channels);
  for (int k = 0; k < spec.channels; ++k) {
    g(k) = spec.gains[static_cast<std::size_t>(k) % spec.gains.size()];
    a(k) = spec.exponents[static_cast<std::size_t>(k) % spec.exponents.size()];
  }
  return AcousticSystem(std::move(w_in), std::move(w_out), std::move(g), std::move(a));
}

double AcousticSystem::control_law(double u, double gain, double alpha) {
  if (u == 0.0) return 0.0;
  return gain * std::copysign(std::pow(std::abs(u), alpha), u);
}

double AcousticSystem::control_law_derivative(double u, double gain, double alpha) {
  if (u == 0.0) {
    if (alpha == 1.0) return gain;
    return 0.0;
  }
  return gain * alpha * std::pow(std::abs(u), alpha - 1.0);
}

Matrix AcousticSystem::forward(const Matrix& x) const {
  check_forward_input(*this, x);
  Matrix u = x * w_in_.transpose();
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    for (Eigen::Index b = 0; b < u.rows(); ++b) u(b, k) = control_law(u(b, k), gains_(k), exponents_(k));
  }
  return u * w_out_.transpose();
}

Matrix AcousticSystem::vjp(const Matrix& x, const Matrix& cotangent) const {
  check_forward_input(*this, x);
  if (cotangent.rows() != x.rows() || cotangent.cols() != output_dim()) {
    throw ConsistencyError("acoustic vjp cotangent shape mismatch");
  }
  const Matrix u = x * w_in_.transpose();
  Matrix back = cotangent * w_out_;
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    for (Eigen::Index b = 0; b < u.rows(); ++b) {
      back(b, k) *= control_law_derivative(u(b, k), gains_(k), exponents_(k));
    }
  }
  return back * w_in_;
}

std::unique_ptr<Simulator> AcousticSystem::perturbed(double mu, double sigma, std::uint64_t seed) const {
  Matrix w_in = w_in_;
  Matrix w_out = w_out_;
  if (sigma != 0.0 || mu != 0.0) {
    Rng rng(seed);
    add_gaussian(w_in, mu, sigma, rng);
    add_gaussian(w_out, mu, sigma, rng);
  }
  return std::make_unique<AcousticSystem>(std::move(w_in), std::move(w_out), gains_, exponents_);
}

std::unique_ptr<Simulator> AcousticSystem::clone() const { return std::make_unique<AcousticSystem>(*this); }

double AcousticSystem::parameter_std() const {
  Matrix all(w_in_.size() + w_out_.size(), 1);
  all << w_in_.reshaped(), w_out_.reshaped();
  return elementwise_std(all);
}

std::vector<Tensor> AcousticSystem::parameters(const std::string& prefix) const {
  return {to_tensor(prefix + "W_in", w_in_), to_tensor(prefix + "W_out", w_out_),
          to_tensor(prefix + "gains", gains_), to_tensor(prefix + "exponents", exponents_)};
}

}  // namespace pnn::physical
