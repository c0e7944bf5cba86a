#include "pnn/physical/optics.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "pnn/core/error.hpp"

namespace pnn::physical {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CMatrix unitary_dft_matrix(int n) {
  if (n <= 0) throw InvalidSpec("DFT length must be positive");
  CMatrix f(n, n);
  std::vector<Complex> buf(static_cast<std::size_t>(n));
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    buf[static_cast<std::size_t>(k)] = Complex(1.0, 0.0);
    fftw_execute(plan);
    for (int j = 0; j < n; ++j) f(j, k) = buf[static_cast<std::size_t>(j)] * scale;
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return f;
}

double elementwise_std(const CMatrix& m) {
  const Eigen::Index n = m.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += m.data()[i].real() + m.data()[i].imag();
  mean /= 2.0 * static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = m.data()[i].real() - mean;
    const double im = m.data()[i].imag() - mean;
    ss += re * re + im * im;
  }
  return std::sqrt(ss / (2.0 * static_cast<double>(n)));
}

double elementwise_std(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double mean = m.mean();
  return std::sqrt((m.array() - mean).square().mean());
}

OpticsSystem::OpticsSystem(CMatrix transmission, double phase_gain)
    : t_(std::move(transmission)), phase_gain_(phase_gain) {
  if (t_.rows() == 0 || t_.rows() != t_.cols()) {
    throw InvalidSpec("optics transmission matrix must be square and non-empty");
  }
  if (!t_.allFinite()) throw InvalidSpec("optics transmission matrix has non-finite entries");
  if (!std::isfinite(phase_gain_)) throw InvalidSpec("optics phase_gain must be finite");
  const CMatrix f = unitary_dft_matrix(static_cast<int>(t_.rows()));
  composite_ = f.adjoint() * t_ * f;
  composite_t_ = composite_.transpose();
}

OpticsSystem OpticsSystem::random(int dim, std::uint64_t seed, double phase_gain) {
  if (dim <= 0) throw InvalidSpec("optics dimension must be positive");
  Rng rng(seed);
  return OpticsSystem(complex_gaussian(dim, dim, 1.0 / std::sqrt(2.0 * dim), rng), phase_gain);
}

CMatrix OpticsSystem::field(const Matrix& x) const {
  CMatrix e(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double p = phase_gain_ * x(i, j);
      e(i, j) = Complex(std::cos(p), std::sin(p));
    }
  }
  return e;
}

Matrix OpticsSystem::forward(const Matrix& x) const {
  check_forward_input(*this, x);
  CMatrix z(x.rows(), t_.rows());
  z.noalias() = field(x) * composite_t_;
  return z.cwiseAbs2();
}

Matrix OpticsSystem::vjp(const Matrix& x, const Matrix& cotangent) const {
  check_forward_input(*this, x);
  if (cotangent.rows() != x.rows() || cotangent.cols() != output_dim()) {
    throw ConsistencyError("optics vjp cotangent shape mismatch");
  }
  const CMatrix e = field(x);
  CMatrix z(x.rows(), t_.rows());
  z.noalias() = e * composite_t_;
  // out_k = |z_k|^2, z = M e; d out_k / d x_j = 2 Re(conj(z_k) M_kj i g e_j)
  const CMatrix w = (cotangent.cast<Complex>().array() * z.array().conjugate()).matrix();
  CMatrix q(x.rows(), x.cols());
  q.noalias() = w * composite_;
  return (-2.0 * phase_gain_) * (e.array() * q.array()).imag().matrix();
}

std::unique_ptr<Simulator> OpticsSystem::perturbed(double mu, double sigma, std::uint64_t seed) const {
  CMatrix t = t_;
  Rng rng(seed);
  if (sigma != 0.0 || mu != 0.0) add_gaussian(t, mu, sigma, rng);
  return std::make_unique<OpticsSystem>(std::move(t), phase_gain_);
}

std::unique_ptr<Simulator> OpticsSystem::clone() const { return std::make_unique<OpticsSystem>(*this); }

double OpticsSystem::parameter_std() const { return elementwise_std(t_); }

std::vector<Tensor> OpticsSystem::parameters(const std::string& prefix) const {
  return {to_tensor(prefix + "T", t_), scalar_tensor(prefix + "phase_gain", phase_gain_)};
}

}  // namespace pnn::physical
