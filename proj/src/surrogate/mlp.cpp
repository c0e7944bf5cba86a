#include "pnn/surrogate/mlp.hpp"

#include <cmath>
#include <random>

#include "pnn/core/error.hpp"

namespace pnn::surrogate {

namespace {

constexpr double kLnEps = 1e-5;

}  // namespace

double silu(double u) { return u / (1.0 + std::exp(-u)); }

double silu_derivative(double u) {
  const double s = 1.0 / (1.0 + std::exp(-u));
  return s * (1.0 + u * (1.0 - s));
}

struct Mlp::Cache {
  std::vector<Matrix> inputs;   // input to each layer
  std::vector<Matrix> pre;      // affine output
  std::vector<Matrix> normed;   // layer-normalised (before gain/bias)
  std::vector<Vector> inv_std;  // per row
  std::vector<Matrix> act_in;   // SiLU argument
  std::vector<Matrix> mask;     // dropout scale per entry, empty when off
};

Mlp::Mlp(const std::vector<int>& widths, Rng& rng, MlpOptions options) : widths_(widths), options_(options) {
  if (widths.size() < 2) throw InvalidSpec("an MLP needs at least input and output widths");
  for (int w : widths) {
    if (w <= 0) throw InvalidSpec("MLP widths must be positive");
  }
  if (options.dropout < 0.0 || options.dropout >= 1.0) throw InvalidSpec("dropout must lie in [0, 1)");
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.w.resize(widths[l + 1], widths[l]);
    const double s = std::sqrt(2.0 / widths[l]);
    for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.w.rows(); ++i) layer.w(i, j) = s * n01(rng);
    }
    layer.b = Vector::Zero(widths[l + 1]);
    if (options.layer_norm && l + 2 < widths.size()) {
      layer.ln_gain = Vector::Ones(widths[l + 1]);
      layer.ln_bias = Vector::Zero(widths[l + 1]);
    }
    layers_.push_back(std::move(layer));
  }
}

Matrix Mlp::run(const Matrix& x, Cache* cache, Rng* rng) const {
  if (layers_.empty()) throw InvalidSpec("MLP has no layers");
  if (x.cols() != input_dim()) {
    throw ConsistencyError("MLP expects input dimension " + std::to_string(input_dim()) + ", got " +
                           std::to_string(x.cols()));
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const bool hidden = l + 1 < layers_.size();
    if (cache != nullptr) cache->inputs.push_back(a);
    Matrix z = a * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    if (!hidden) return z;
    if (cache != nullptr) cache->pre.push_back(z);
    if (layer.ln_gain.size() > 0) {
      const Vector mean = z.rowwise().mean();
      z.colwise() -= mean;
      const Vector inv = ((z.rowwise().squaredNorm() / static_cast<double>(z.cols())).array() + kLnEps).rsqrt();
      z.array().colwise() *= inv.array();
      if (cache != nullptr) {
        cache->normed.push_back(z);
        cache->inv_std.push_back(inv);
      }
      z.array().rowwise() *= layer.ln_gain.transpose().array();
      z.rowwise() += layer.ln_bias.transpose();
    } else if (cache != nullptr) {
      cache->normed.emplace_back();
      cache->inv_std.emplace_back();
    }
    if (cache != nullptr) cache->act_in.push_back(z);
    a = z.unaryExpr([](double u) { return silu(u); });
    Matrix mask;
    if (rng != nullptr && options_.dropout > 0.0) {
      std::bernoulli_distribution keep(1.0 - options_.dropout);
      mask.resize(a.rows(), a.cols());
      const double scale = 1.0 / (1.0 - options_.dropout);
      for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? scale : 0.0;
      a = a.cwiseProduct(mask);
    }
    if (cache != nullptr) cache->mask.push_back(std::move(mask));
  }
  return a;
}

Matrix Mlp::forward(const Matrix& x) const { return run(x, nullptr, nullptr); }

Mlp::Gradients Mlp::backward(const Matrix& x, const Matrix& cotangent, Rng* rng) const {
  Cache cache;
  const Matrix out = run(x, &cache, rng);
  if (cotangent.rows() != out.rows() || cotangent.cols() != out.cols()) {
    throw ConsistencyError("MLP cotangent shape mismatch");
  }
  return backprop(cache, cotangent);
}

Mlp::Gradients Mlp::backprop(const Cache& cache, const Matrix& cotangent) const {
  Gradients g;
  g.layers.resize(layers_.size());
  Matrix d = cotangent;  // gradient w.r.t. the current layer's output
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const bool hidden = li + 1 < layers_.size();
    Layer& gl = g.layers[li];
    if (hidden) {
      if (cache.mask[li].size() > 0) d = d.cwiseProduct(cache.mask[li]);
      d = d.cwiseProduct(cache.act_in[li].unaryExpr([](double u) { return silu_derivative(u); }));
      if (layer.ln_gain.size() > 0) {
        const Matrix& n = cache.normed[li];
        gl.ln_gain = (d.cwiseProduct(n)).colwise().sum().transpose();
        gl.ln_bias = d.colwise().sum().transpose();
        Matrix dn = d.array().rowwise() * layer.ln_gain.transpose().array();
        const double k = static_cast<double>(dn.cols());
        const Vector mean_dn = dn.rowwise().sum() / k;
        const Vector mean_dn_n = dn.cwiseProduct(n).rowwise().sum() / k;
        dn.colwise() -= mean_dn;
        dn -= (n.array().colwise() * mean_dn_n.array()).matrix();
        d = (dn.array().colwise() * cache.inv_std[li].array()).matrix();
      }
    }
    gl.w = d.transpose() * cache.inputs[li];
    gl.b = d.colwise().sum().transpose();
    d = d * layer.w;
  }
  g.input = std::move(d);
  return g;
}

double Mlp::mse_step_gradients(const Matrix& x, const Matrix& y, Gradients& grads, Rng* rng) const {
  Cache cache;
  const Matrix out = run(x, &cache, rng);
  if (y.rows() != out.rows() || y.cols() != out.cols()) throw ConsistencyError("MLP target shape mismatch");
  const double n = static_cast<double>(out.size());
  const Matrix diff = out - y;
  grads = backprop(cache, (2.0 / n) * diff);
  return diff.squaredNorm() / n;
}

std::vector<Tensor> Mlp::to_tensors(const std::string& prefix) const {
  std::vector<Tensor> out;
  Vector widths(static_cast<Eigen::Index>(widths_.size()));
  for (std::size_t i = 0; i < widths_.size(); ++i) widths(static_cast<Eigen::Index>(i)) = widths_[i];
  out.push_back(to_tensor(prefix + "widths", widths));
  out.push_back(scalar_tensor(prefix + "layer_norm", options_.layer_norm ? 1.0 : 0.0));
  out.push_back(scalar_tensor(prefix + "dropout", options_.dropout));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = prefix + "layer" + std::to_string(l) + ".";
    out.push_back(to_tensor(p + "w", layers_[l].w));
    out.push_back(to_tensor(p + "b", layers_[l].b));
    if (layers_[l].ln_gain.size() > 0) {
      out.push_back(to_tensor(p + "ln_gain", layers_[l].ln_gain));
      out.push_back(to_tensor(p + "ln_bias", layers_[l].ln_bias));
    }
  }
  return out;
}

Mlp Mlp::from_tensors(const std::vector<Tensor>& tensors, const std::string& prefix) {
  Mlp m;
  const Vector widths = tensor_to_vector(find_tensor(tensors, prefix + "widths"));
  for (Eigen::Index i = 0; i < widths.size(); ++i) m.widths_.push_back(static_cast<int>(widths(i)));
  m.options_.layer_norm = tensor_to_scalar(find_tensor(tensors, prefix + "layer_norm")) != 0.0;
  m.options_.dropout = tensor_to_scalar(find_tensor(tensors, prefix + "dropout"));
  for (std::size_t l = 0; l + 1 < m.widths_.size(); ++l) {
    const std::string p = prefix + "layer" + std::to_string(l) + ".";
    Layer layer;
    layer.w = tensor_to_matrix(find_tensor(tensors, p + "w"));
    layer.b = tensor_to_vector(find_tensor(tensors, p + "b"));
    if (m.options_.layer_norm && l + 2 < m.widths_.size()) {
      layer.ln_gain = tensor_to_vector(find_tensor(tensors, p + "ln_gain"));
      layer.ln_bias = tensor_to_vector(find_tensor(tensors, p + "ln_bias"));
    }
    if (layer.w.rows() != m.widths_[l + 1] || layer.w.cols() != m.widths_[l] || layer.b.size() != m.widths_[l + 1]) {
      throw FormatError("MLP tensor shapes disagree with the stored widths at layer " + std::to_string(l));
    }
    m.layers_.push_back(std::move(layer));
  }
  return m;
}

Matrix mlp_vjp(const Mlp& mlp, const Matrix& x, const Matrix& cotangent) {
  return mlp.backward(x, cotangent, nullptr).input;
}

double mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.size() == 0) throw ConsistencyError("mse: shape mismatch");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace pnn::surrogate
