#include "pnn/physical/backend.hpp"

#include <cmath>
#include <random>

#include "pnn/core/error.hpp"

namespace pnn::physical {

const Simulator* as_simulator(const ForwardBackend& sys) {
  return dynamic_cast<const Simulator*>(&sys);
}

namespace {

const Simulator& require_simulator(const ForwardBackend& sys, const char* op) {
  const auto* sim = as_simulator(sys);
  if (sim == nullptr) {
    throw UnsupportedOperation(std::string(op) + " is not available for a " + sys.kind() + " backend");
  }
  return *sim;
}

}  // namespace

std::unique_ptr<Simulator> perturb(const ForwardBackend& sys, double mu, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidSpec("perturbation sigma must be non-negative");
  return require_simulator(sys, "perturb").perturbed(mu, sigma, seed);
}

std::unique_ptr<Simulator> clone_with_param_noise(const ForwardBackend& sys, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidSpec("parameter-noise sigma must be non-negative");
  return require_simulator(sys, "clone_with_param_noise").perturbed(0.0, sigma, seed);
}

Vector backend_vjp(const ForwardBackend& sys, const Vector& x, const Vector& cotangent) {
  const auto& sim = require_simulator(sys, "vjp");
  if (cotangent.size() != sim.output_dim()) {
    throw ConsistencyError("vjp cotangent has dimension " + std::to_string(cotangent.size()) +
                           ", expected " + std::to_string(sim.output_dim()));
  }
  return sim.vjp(x.transpose(), cotangent.transpose()).row(0).transpose();
}

void check_forward_input(const ForwardBackend& sys, const Matrix& x) {
  if (x.cols() != sys.input_dim()) {
    throw ConsistencyError(sys.kind() + " backend expects input dimension " +
                           std::to_string(sys.input_dim()) + ", got " + std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw ConsistencyError(sys.kind() + " backend received non-finite input");
}

void add_gaussian(Matrix& m, double mu, double sigma, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) += mu + sigma * noise(rng);
  }
}

void add_gaussian(CMatrix& m, double mu, double sigma, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double re = mu + sigma * noise(rng);
      const double im = mu + sigma * noise(rng);
      m(i, j) += Complex(re, im);
    }
  }
}

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double component_std, Rng& rng) {
  CMatrix m = CMatrix::Zero(rows, cols);
  add_gaussian(m, 0.0, component_std, rng);
  return m;
}

}  // namespace pnn::physical
