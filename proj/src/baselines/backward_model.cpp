#include "pnn/baselines/backward_model.hpp"

#include "pnn/core/error.hpp"

namespace pnn::baselines {

SimulatorBackward::SimulatorBackward(physical::SimulatorPtr sim) : sim_(std::move(sim)) {
  if (!sim_) throw InvalidSpec("SimulatorBackward needs a simulator");
}

Matrix SimulatorBackward::vjp(const Matrix& x, const Matrix& cotangent) const { return sim_->vjp(x, cotangent); }

SurrogateBackward::SurrogateBackward(surrogate::Mlp mlp) : mlp_(std::move(mlp)) {}

Matrix SurrogateBackward::vjp(const Matrix& x, const Matrix& cotangent) const {
  return surrogate::mlp_vjp(mlp_, x, cotangent);
}

BackwardBinding exact_binding(const std::vector<physical::BackendPtr>& backends) {
  BackwardBinding out;
  for (std::size_t l = 0; l < backends.size(); ++l) {
    auto sim = std::dynamic_pointer_cast<const physical::Simulator>(backends[l]);
    if (!sim) {
      throw UnsupportedOperation("layer " + std::to_string(l) + ": backend '" + backends[l]->kind() +
                                 "' has no gradients");
    }
    out.push_back(std::make_shared<SimulatorBackward>(sim));
  }
  return out;
}

BackwardBinding clone_binding(const std::vector<physical::BackendPtr>& backends, double sigma, std::uint64_t seed) {
  BackwardBinding out;
  for (std::size_t l = 0; l < backends.size(); ++l) {
    physical::SimulatorPtr copy = physical::clone_with_param_noise(*backends[l], sigma, seed + l);
    out.push_back(std::make_shared<SimulatorBackward>(std::move(copy)));
  }
  return out;
}

BackwardBinding surrogate_binding(const std::vector<physical::BackendPtr>& backends,
                                  const std::vector<Matrix>& inputs, const surrogate::FitConfig& cfg,
                                  std::vector<surrogate::FitReport>* reports) {
  if (inputs.size() != backends.size()) throw ConsistencyError("surrogate_binding: one input matrix per layer");
  BackwardBinding out;
  for (std::size_t l = 0; l < backends.size(); ++l) {
    surrogate::FitConfig layer_cfg = cfg;
    layer_cfg.seed = cfg.seed + l;
    surrogate::FitResult fit = surrogate::fit_surrogate(inputs[l], backends[l]->forward(inputs[l]), layer_cfg);
    if (reports != nullptr) reports->push_back(fit.report);
    out.push_back(std::make_shared<SurrogateBackward>(std::move(fit.model)));
  }
  return out;
}

}  // namespace pnn::baselines
