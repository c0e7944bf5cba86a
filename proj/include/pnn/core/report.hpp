#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnn/core/metrics.hpp"

namespace pnn {

inline constexpr double kNotEvaluated = std::numeric_limits<double>::quiet_NaN();

struct EpochRecord {
  int epoch = 0;
  double train_accuracy = kNotEvaluated;
  double test_accuracy = kNotEvaluated;
  double train_loss = kNotEvaluated;
  double seconds = 0.0;
  // Method-specific extra series, e.g. twin-evaluated accuracy for in-silico.
  std::map<std::string, double> extra;
};

struct LossTraceEntry {
  int epoch = 0;
  int layer = 0;
  int step = 0;
  double loss = 0.0;
};

// Everything a training run produces besides the trained parameters.
struct RunReport {
  std::string method;
  std::string status = "ok";  // "ok" or "aborted"
  std::string message;
  std::vector<EpochRecord> epochs;
  std::vector<LossTraceEntry> loss_trace;
  std::map<std::string, ConfusionMatrix> confusion;  // keyed by split
  std::map<std::string, double> summary;
};

}  // namespace pnn
