#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pnn/baselines/bp_trainers.hpp"
#include "pnn/fftrain/trainer.hpp"

namespace pnn::baselines {

// Both arms of one seed, built on the same physical systems.
struct PerturbArms {
  fftrain::FfNetwork ff;
  BpNetwork bp;
};

using ArmFactory = std::function<PerturbArms(std::uint64_t seed)>;

// Backward models for the PA-BP arm, built once from the unperturbed arm.
using BindingFactory = std::function<BackwardBinding(const BpNetwork& net, const Dataset& train, std::uint64_t seed)>;

struct PerturbRecoverConfig {
  // Noise levels in units of each system's parameter_std().
  std::vector<double> sigmas = {0.5};
  double mu = 0.0;
  int epochs_pre = 20;
  int epochs_post = 20;
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t perturb_seed = 1000;
  fftrain::MfffConfig mfff;
  BpConfig bp;
  // PA-BP keeps its backward models for the whole run. Without a factory
  // they are copies of the unperturbed systems drawn with this much extra
  // noise.
  double backward_clone_sigma = 0.0;
  BindingFactory make_binding;
  double recovery_tolerance = 0.02;
  int recovery_window = 3;
  int pre_window = 3;  // pre-perturbation accuracy averages this many epochs
  bool run_mfff = true;
  bool run_pa_bp = true;
};

struct ArmTrace {
  std::string arm;  // "mfff" or "pa-bp"
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> pre_accuracy;   // test accuracy per pre-perturbation epoch
  double pre_level = 0.0;             // mean of the last pre_window entries
  double perturbed_accuracy = 0.0;    // right after the perturbation, before retraining
  std::vector<double> post_accuracy;  // per post-perturbation epoch
  int recovery_epoch = -1;            // first post epoch of a sustained recovery, -1 if none
  double final_accuracy = 0.0;
};

struct PerturbRecoverResult {
  std::vector<ArmTrace> traces;
  RunReport report;  // summary holds per (arm, sigma) medians over seeds
};

// Trains each arm with its own method, perturbs every layer's system
// (mu + sigma * parameter_std) and keeps training. Pre-perturbation
// training is shared by all sigmas of a seed. Runs are sequential.
PerturbRecoverResult perturb_recover_experiment(const ArmFactory& factory, const Dataset& train, const Dataset& test,
                                                const PerturbRecoverConfig& cfg);

// First epoch (1-based) from which `window` consecutive accuracies stay
// within `tolerance` of `reference`; -1 when that never happens.
int recovery_epoch(const std::vector<double>& accuracy, double reference, double tolerance, int window);

}  // namespace pnn::baselines
