#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnn/core/adam.hpp"
#include "pnn/surrogate/mlp.hpp"

namespace pnn::surrogate {

struct FitConfig {
  std::vector<int> hidden = {100, 200, 100};
  int epochs = 500;
  double lr = 1e-3;
  int batch_size = 128;
  double val_frac = 0.2;
  MlpOptions options;
  std::uint64_t seed = 0;
};

struct FitReport {
  // Entry 0 is the untrained model; entry e follows epoch e.
  std::vector<double> train_mse;
  std::vector<double> val_mse;
  double final_val_mse = 0.0;
  bool diverged = false;
  std::string message;
};

struct FitResult {
  Mlp model;
  FitReport report;
};

// Fits y ~ mlp(x) by minibatch Adam on the mean squared error. A
// non-finite loss stops the fit, keeps the parameters of the last finite
// epoch and flags the report.
FitResult fit_surrogate(const Matrix& x, const Matrix& y, const FitConfig& cfg);

}  // namespace pnn::surrogate
