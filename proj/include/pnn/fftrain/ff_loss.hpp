#pragma once

#include "pnn/core/types.hpp"

namespace pnn::fftrain {

// Row-wise sum of squares.
Vector goodness(const Matrix& y);

// log(1 + exp(z)) without overflow.
double softplus(double z);

// Layer loss for one sample: softplus(-theta (g_pos - g_neg)).
double ff_loss(double g_pos, double g_neg, double theta);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

// Mean layer loss over a batch with y = h W^T, and its gradient w.r.t. W.
// Only the recorded physical outputs h_pos / h_neg enter; nothing about the
// backend that produced them is needed.
LossAndGrad ff_loss_and_grad(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta);
Matrix ff_loss_grad(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta);
double ff_batch_loss(const Matrix& w, const Matrix& h_pos, const Matrix& h_neg, double theta);

// Each row divided by (its L2 norm + eps).
Matrix normalize_direction(const Matrix& y, double eps);

// Physical input of layer l >= 1: the normalised previous output, followed
// by the normalised labelled input when skip connections are on.
Matrix layer_input(int layer, const Matrix& prev_normed, const Matrix& x0, bool skip, double eps);

}  // namespace pnn::fftrain
