#pragma once

#include <cstdint>

#include "pnn/physical/microwave.hpp"

namespace pnn::physical {

// Random binary configurations, one per row.
Matrix random_binary_configs(int n_configs, int input_dim, std::uint64_t seed);

// Per-frequency |mean t|^2 / (2 var t) over an ensemble of configurations,
// with var = sum |t - mean|^2 / (n - 1). Frequencies whose variance
// vanishes report +infinity.
Vector k_factor(const MicrowaveSystem& sys, int n_configs, std::uint64_t seed);
Vector k_factor(const MicrowaveSystem& sys, const Matrix& configs);

// Ratio cap used when the linear model is (numerically) exact.
inline constexpr double kLinearityCapDb = 100.0;

// Fits t_f ~ h0 + w^T c on n_train random binary configurations and
// reports 20 log10(SD(t) / SD(residual)) in dB on n_test held-out ones.
Vector linearity_metric(const MicrowaveSystem& sys, int n_train, int n_test, std::uint64_t seed);
Vector linearity_metric(const MicrowaveSystem& sys, const Matrix& train_configs, const Matrix& test_configs);

// Median over frequencies.
double median(Vector v);

}  // namespace pnn::physical
