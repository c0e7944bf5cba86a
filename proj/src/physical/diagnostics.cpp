#include "pnn/physical/diagnostics.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pnn/core/error.hpp"

namespace pnn::physical {

Matrix random_binary_configs(int n_configs, int input_dim, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution bit(0.5);
  Matrix c(n_configs, input_dim);
  for (int i = 0; i < n_configs; ++i) {
    for (int j = 0; j < input_dim; ++j) c(i, j) = bit(rng) ? 1.0 : 0.0;
  }
  return c;
}

Vector k_factor(const MicrowaveSystem& sys, int n_configs, std::uint64_t seed) {
  if (n_configs < 2) throw InvalidSpec("k_factor needs at least two configurations");
  return k_factor(sys, random_binary_configs(n_configs, sys.input_dim(), seed));
}

Vector k_factor(const MicrowaveSystem& sys, const Matrix& configs) {
  if (configs.rows() < 2) throw InvalidSpec("k_factor needs at least two configurations");
  const CMatrix t = sys.with_encoding(PixelEncoding::Binary).transfer(configs);
  const double n = static_cast<double>(t.rows());
  Vector k(t.cols());
  for (Eigen::Index f = 0; f < t.cols(); ++f) {
    const Complex mu = t.col(f).mean();
    const double var = (t.col(f).array() - mu).abs2().sum() / (n - 1.0);
    const double power = std::norm(mu);
    if (var <= 1e-24 * std::max(power, 1e-300)) {
      k(f) = std::numeric_limits<double>::infinity();
    } else {
      k(f) = power / (2.0 * var);
    }
  }
  return k;
}

Vector linearity_metric(const MicrowaveSystem& sys, int n_train, int n_test, std::uint64_t seed) {
  if (n_train <= sys.input_dim() + 1) throw InvalidSpec("linearity_metric needs n_train > input_dim + 1");
  if (n_test < 2) throw InvalidSpec("linearity_metric needs at least two test configurations");
  const Matrix all = random_binary_configs(n_train + n_test, sys.input_dim(), seed);
  return linearity_metric(sys, all.topRows(n_train), all.bottomRows(n_test));
}

namespace {

Matrix design(const Matrix& configs) {
  Matrix x(configs.rows(), configs.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(configs.cols()) = configs;
  return x;
}

double complex_sd(const CVector& v) {
  const Complex mu = v.mean();
  return std::sqrt((v.array() - mu).abs2().sum() / static_cast<double>(v.size()));
}

}  // namespace

Vector linearity_metric(const MicrowaveSystem& sys, const Matrix& train_configs, const Matrix& test_configs) {
  if (train_configs.rows() <= sys.input_dim() + 1) {
    throw InvalidSpec("linearity_metric needs n_train > input_dim + 1");
  }
  const MicrowaveSystem binary = sys.with_encoding(PixelEncoding::Binary);
  const Matrix x_train = design(train_configs);
  const Matrix x_test = design(test_configs);
  const Eigen::ColPivHouseholderQR<Matrix> qr(x_train);
  if (qr.rank() < x_train.cols()) {
    throw NumericalError("linearity_metric: design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(x_train.cols()) + ")");
  }
  const CMatrix t_train = binary.transfer(train_configs);
  const CMatrix t_test = binary.transfer(test_configs);
  Vector zeta(t_train.cols());
  for (Eigen::Index f = 0; f < t_train.cols(); ++f) {
    const Vector w_re = qr.solve(Vector(t_train.col(f).real()));
    const Vector w_im = qr.solve(Vector(t_train.col(f).imag()));
    CVector pred(x_test.rows());
    pred.real() = x_test * w_re;
    pred.imag() = x_test * w_im;
    const CVector h = t_test.col(f);
    const double sd_h = complex_sd(h);
    const double sd_err = complex_sd(CVector(h - pred));
    if (sd_h == 0.0 || sd_err <= 1e-5 * sd_h) {
      zeta(f) = kLinearityCapDb;
    } else {
      zeta(f) = std::min(kLinearityCapDb, 20.0 * std::log10(sd_h / sd_err));
    }
  }
  return zeta;
}

double median(Vector v) {
  if (v.size() == 0) throw InvalidSpec("median of an empty vector");
  std::sort(v.data(), v.data() + v.size());
  const auto n = v.size();
  return n % 2 == 1 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

}  // namespace pnn::physical
