#include "pnn/physical/microwave.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "pnn/core/error.hpp"
#include "pnn/physical/optics.hpp"

namespace pnn::physical {

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

MicrowaveSystem::MicrowaveSystem(CMatrix a, CMatrix u, CMatrix v, std::vector<int> pixel_map, int input_dim,
                                 double eta, double phase_on, PixelEncoding encoding)
    : a_(std::move(a)),
      u_(std::move(u)),
      v_(std::move(v)),
      pixel_map_(std::move(pixel_map)),
      input_dim_(input_dim),
      eta_(eta),
      phase_on_(phase_on),
      encoding_(encoding) {
  const auto m = a_.rows();
  if (m == 0 || a_.cols() != m) throw InvalidSpec("microwave coupling matrix must be square and non-empty");
  if (u_.rows() != m || v_.rows() != m || u_.cols() != v_.cols() || u_.cols() == 0) {
    throw InvalidSpec("microwave u/v must be elements x frequencies and agree with each other");
  }
  if (static_cast<Eigen::Index>(pixel_map_.size()) != m) {
    throw InvalidSpec("microwave pixel_map must have one entry per element");
  }
  if (input_dim_ <= 0) throw InvalidSpec("microwave input_dim must be positive");
  std::vector<bool> used(static_cast<std::size_t>(input_dim_), false);
  for (int p : pixel_map_) {
    if (p < -1 || p >= input_dim_) throw InvalidSpec("microwave pixel_map entry out of range");
    if (p >= 0) used[static_cast<std::size_t>(p)] = true;
  }
  for (bool b : used) {
    if (!b) throw InvalidSpec("microwave pixel_map leaves an input pixel without elements");
  }
  if (!a_.allFinite() || !u_.allFinite() || !v_.allFinite() || !std::isfinite(eta_) || !std::isfinite(phase_on_)) {
    throw InvalidSpec("microwave parameters must be finite");
  }
  if (eta_ < 0.0) throw InvalidSpec("microwave eta must be non-negative");
  // |eig(eta A D)| <= ||eta A D||_2 = eta ||A||_2 for any unimodular diagonal D.
  const double bound = eta_ * spectral_norm(a_);
  if (!(bound < 1.0)) {
    throw InvalidSpec("microwave reverberation does not converge: eta * ||A||_2 = " + std::to_string(bound) +
                      " must be below 1");
  }
}

MicrowaveSystem MicrowaveSystem::random(const MicrowaveSpec& spec) {
  if (spec.elements <= 0 || spec.input_dim <= 0 || spec.frequencies <= 0) {
    throw InvalidSpec("microwave dimensions must be positive");
  }
  if (spec.input_dim > spec.elements) throw InvalidSpec("microwave input_dim exceeds the element count");
  Rng rng(spec.seed);
  CMatrix a = complex_gaussian(spec.elements, spec.elements, 1.0, rng);
  a /= spectral_norm(a);
  const double s = 1.0 / std::sqrt(2.0 * spec.elements);
  CMatrix u = complex_gaussian(spec.elements, spec.frequencies, s, rng);
  CMatrix v = complex_gaussian(spec.elements, spec.frequencies, s, rng);
  std::vector<int> map(static_cast<std::size_t>(spec.elements), -1);
  for (int k = 0; k < spec.input_dim; ++k) map[static_cast<std::size_t>(k)] = k;
  return MicrowaveSystem(std::move(a), std::move(u), std::move(v), std::move(map), spec.input_dim, spec.eta,
                         spec.phase_on, spec.encoding);
}

CVector MicrowaveSystem::element_phases(const Eigen::Ref<const Vector>& c, PixelEncoding enc) const {
  CVector d(a_.rows());
  for (Eigen::Index m = 0; m < d.size(); ++m) {
    const int p = pixel_map_[static_cast<std::size_t>(m)];
    double value = p < 0 ? 0.0 : c(p);
    if (enc == PixelEncoding::Binary) value = value >= 0.5 ? 1.0 : 0.0;
    d(m) = std::polar(1.0, phase_on_ * value);
  }
  return d;
}

CMatrix MicrowaveSystem::transfer(const Matrix& c) const {
  check_forward_input(*this, c);
  const auto m = a_.rows();
  const CMatrix eye = CMatrix::Identity(m, m);
  CMatrix t(c.rows(), u_.cols());
  for (Eigen::Index b = 0; b < c.rows(); ++b) {
    const CVector d = element_phases(c.row(b).transpose(), encoding_);
    const CMatrix r = eye - eta_ * (a_ * d.asDiagonal());
    const CMatrix g = r.partialPivLu().solve(v_);
    // t_f = u_f . g_f (plain transpose, no conjugation)
    t.row(b) = (u_.array() * g.array()).colwise().sum();
  }
  return t;
}

Matrix MicrowaveSystem::forward(const Matrix& c) const { return transfer(c).cwiseAbs2(); }

Matrix MicrowaveSystem::vjp(const Matrix& c, const Matrix& cotangent) const {
  check_forward_input(*this, c);
  if (cotangent.rows() != c.rows() || cotangent.cols() != output_dim()) {
    throw ConsistencyError("microwave vjp cotangent shape mismatch");
  }
  const auto m = a_.rows();
  const CMatrix eye = CMatrix::Identity(m, m);
  const Complex i_phase(0.0, phase_on_);
  Matrix grad = Matrix::Zero(c.rows(), input_dim_);
  for (Eigen::Index b = 0; b < c.rows(); ++b) {
    const CVector d = element_phases(c.row(b).transpose(), PixelEncoding::ContinuousPhase);
    const CMatrix r = eye - eta_ * (a_ * d.asDiagonal());
    const Eigen::PartialPivLU<CMatrix> lu(r);
    const CMatrix gv = lu.solve(v_);                        // M x F
    const CMatrix left = lu.transpose().solve(u_);          // R^-T u, M x F
    const CMatrix la = (left.transpose() * a_);             // F x M, u^T R^-1 A
    const CVector t = (u_.array() * gv.array()).colwise().sum().transpose();
    // dt_f / dphi_m = eta * la(f,m) * i*phase_on*d_m * gv(m,f)
    for (Eigen::Index e = 0; e < m; ++e) {
      const int p = pixel_map_[static_cast<std::size_t>(e)];
      if (p < 0) continue;
      const Complex scale = eta_ * i_phase * d(e);
      double acc = 0.0;
      for (Eigen::Index f = 0; f < t.size(); ++f) {
        const Complex dt = scale * la(f, e) * gv(e, f);
        acc += cotangent(b, f) * 2.0 * (std::conj(t(f)) * dt).real();
      }
      grad(b, p) += acc;
    }
  }
  return grad;
}

std::unique_ptr<Simulator> MicrowaveSystem::perturbed(double mu, double sigma, std::uint64_t seed) const {
  CMatrix a = a_;
  if (sigma != 0.0 || mu != 0.0) {
    Rng rng(seed);
    add_gaussian(a, mu, sigma, rng);
  }
  return std::make_unique<MicrowaveSystem>(std::move(a), u_, v_, pixel_map_, input_dim_, eta_, phase_on_, encoding_);
}

std::unique_ptr<Simulator> MicrowaveSystem::clone() const { return std::make_unique<MicrowaveSystem>(*this); }

double MicrowaveSystem::parameter_std() const { return elementwise_std(a_); }

std::vector<Tensor> MicrowaveSystem::parameters(const std::string& prefix) const {
  Vector map(static_cast<Eigen::Index>(pixel_map_.size()));
  for (std::size_t i = 0; i < pixel_map_.size(); ++i) map(static_cast<Eigen::Index>(i)) = pixel_map_[i];
  return {to_tensor(prefix + "A", a_),
          to_tensor(prefix + "u", u_),
          to_tensor(prefix + "v", v_),
          to_tensor(prefix + "pixel_map", map),
          scalar_tensor(prefix + "input_dim", input_dim_),
          scalar_tensor(prefix + "eta", eta_),
          scalar_tensor(prefix + "phase_on", phase_on_),
          scalar_tensor(prefix + "encoding", encoding_ == PixelEncoding::Binary ? 0.0 : 1.0)};
}

MicrowaveSystem MicrowaveSystem::with_encoding(PixelEncoding encoding) const {
  MicrowaveSystem copy = *this;
  copy.encoding_ = encoding;
  return copy;
}

MicrowaveSystem MicrowaveSystem::with_eta(double eta) const {
  return MicrowaveSystem(a_, u_, v_, pixel_map_, input_dim_, eta, phase_on_, encoding_);
}

}  // namespace pnn::physical
