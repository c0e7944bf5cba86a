#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pnn/physical/backend.hpp"
#include "pnn/surrogate/fit.hpp"

namespace pnn::baselines {

// Stands in for a physical layer during the backward pass. Always
// evaluated at the inputs the real system actually received.
class BackwardModel {
 public:
  virtual ~BackwardModel() = default;
  virtual Matrix vjp(const Matrix& x, const Matrix& cotangent) const = 0;
  virtual std::string kind() const = 0;
};

// Gradients of a simulator: exact when it is the forward system itself,
// mismatched when it is a noisy or stale copy.
class SimulatorBackward : public BackwardModel {
 public:
  explicit SimulatorBackward(physical::SimulatorPtr sim);
  Matrix vjp(const Matrix& x, const Matrix& cotangent) const override;
  std::string kind() const override { return "simulator:" + sim_->kind(); }
  const physical::Simulator& simulator() const { return *sim_; }

 private:
  physical::SimulatorPtr sim_;
};

class SurrogateBackward : public BackwardModel {
 public:
  explicit SurrogateBackward(surrogate::Mlp mlp);
  Matrix vjp(const Matrix& x, const Matrix& cotangent) const override;
  std::string kind() const override { return "surrogate"; }
  const surrogate::Mlp& mlp() const { return mlp_; }

 private:
  surrogate::Mlp mlp_;
};

using BackwardModelPtr = std::shared_ptr<const BackwardModel>;
// One backward model per layer, in layer order.
using BackwardBinding = std::vector<BackwardModelPtr>;

// The forward systems themselves; UnsupportedOperation for non-simulators.
BackwardBinding exact_binding(const std::vector<physical::BackendPtr>& backends);
// Independent parameter-noise copies, layer l seeded with seed + l.
BackwardBinding clone_binding(const std::vector<physical::BackendPtr>& backends, double sigma, std::uint64_t seed);
// One MLP per layer fitted to (inputs[l], backends[l]->forward(inputs[l])).
BackwardBinding surrogate_binding(const std::vector<physical::BackendPtr>& backends,
                                  const std::vector<Matrix>& inputs, const surrogate::FitConfig& cfg,
                                  std::vector<surrogate::FitReport>* reports = nullptr);

}  // namespace pnn::baselines
