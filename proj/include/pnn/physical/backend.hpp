#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pnn/core/tensor.hpp"
#include "pnn/core/types.hpp"

namespace pnn::physical {

// A physical input/output transformation. Trainers that are model-free
// only ever see this interface.
class ForwardBackend {
 public:
  virtual ~ForwardBackend() = default;

  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  // One output row per input row.
  virtual Matrix forward(const Matrix& x) const = 0;
  virtual std::string kind() const = 0;
};

// A backend we can simulate, and therefore differentiate, perturb and copy.
// Instances are immutable after construction.
class Simulator : public ForwardBackend {
 public:
  // Row-wise vector-Jacobian product: row b of the result is
  // d(cotangent_b . forward(x_b)) / d x_b.
  virtual Matrix vjp(const Matrix& x, const Matrix& cotangent) const = 0;

  // Copy with every free parameter tensor shifted by i.i.d. N(mu, sigma).
  virtual std::unique_ptr<Simulator> perturbed(double mu, double sigma, std::uint64_t seed) const = 0;
  virtual std::unique_ptr<Simulator> clone() const = 0;

  // Standard deviation of the free parameters, pooled over real and
  // imaginary components; the reference scale for relative perturbations.
  virtual double parameter_std() const = 0;

  virtual std::vector<Tensor> parameters(const std::string& prefix) const = 0;
};

using BackendPtr = std::shared_ptr<const ForwardBackend>;
using SimulatorPtr = std::shared_ptr<const Simulator>;

std::unique_ptr<Simulator> perturb(const ForwardBackend& sys, double mu, double sigma, std::uint64_t seed);

// Same noise model as perturb with mu = 0; the result plays the inaccurate
// digital model of `sys`.
std::unique_ptr<Simulator> clone_with_param_noise(const ForwardBackend& sys, double sigma, std::uint64_t seed);

Vector backend_vjp(const ForwardBackend& sys, const Vector& x, const Vector& cotangent);

// nullptr when `sys` is not a simulator.
const Simulator* as_simulator(const ForwardBackend& sys);

// Throws ConsistencyError unless x has sys.input_dim() columns and is finite.
void check_forward_input(const ForwardBackend& sys, const Matrix& x);

// Adds N(mu, sigma) to every entry (real and imaginary parts independently).
void add_gaussian(Matrix& m, double mu, double sigma, Rng& rng);
void add_gaussian(CMatrix& m, double mu, double sigma, Rng& rng);
CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double component_std, Rng& rng);

}  // namespace pnn::physical
