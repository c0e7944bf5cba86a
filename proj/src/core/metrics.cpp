#include "pnn/core/metrics.hpp"

#include <stdexcept>
#include <string>

#include "pnn/core/error.hpp"

namespace pnn {
namespace {

void check_pair(std::span<const int> preds, std::span<const int> labels) {
  if (preds.empty()) throw std::invalid_argument("metrics of an empty prediction set are undefined");
  if (preds.size() != labels.size()) {
    throw ConsistencyError("prediction count " + std::to_string(preds.size()) +
                           " differs from label count " + std::to_string(labels.size()));
  }
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> labels, int n_classes) {
  check_pair(preds, labels);
  ConfusionMatrix m = ConfusionMatrix::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= n_classes || labels[i] < 0 || labels[i] >= n_classes) {
      throw std::out_of_range("class index outside [0," + std::to_string(n_classes) + ")");
    }
    ++m(labels[i], preds[i]);
  }
  return m;
}

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  check_pair(preds, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace pnn
