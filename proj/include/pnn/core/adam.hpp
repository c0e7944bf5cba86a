#pragma once

#include "pnn/core/types.hpp"

namespace pnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam state for one parameter tensor.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index rows, Eigen::Index cols, AdamConfig config = {});

  void step(Eigen::Ref<Matrix> param, const Eigen::Ref<const Matrix>& grad);

  const AdamConfig& config() const { return config_; }
  void set_config(const AdamConfig& config) { config_ = config; }
  const Matrix& first_moment() const { return m_; }
  const Matrix& second_moment() const { return v_; }
  long steps() const { return t_; }
  void restore(Matrix m, Matrix v, long steps);

 private:
  AdamConfig config_;
  Matrix m_;
  Matrix v_;
  long t_ = 0;
};

}  // namespace pnn
