#pragma once

#include <span>

#include <Eigen/Core>

namespace pnn {

using ConfusionMatrix = Eigen::MatrixXi;

// entry (i, j) counts samples with true class i predicted as j.
ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> labels, int n_classes);
double accuracy(std::span<const int> preds, std::span<const int> labels);

}  // namespace pnn
