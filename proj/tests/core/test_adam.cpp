#include <gtest/gtest.h>

#include <cmath>

#include "pnn/core/adam.hpp"

using namespace pnn;

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps') = lr * sign(g).
  Matrix w = Matrix::Zero(2, 2);
  Matrix g(2, 2);
  g << 1, -2, 0.5, -0.25;
  Adam opt(2, 2, AdamConfig{0.1, 0.9, 0.999, 1e-12});
  opt.step(w, g);
  EXPECT_NEAR(w(0, 0), -0.1, 1e-9);
  EXPECT_NEAR(w(0, 1), 0.1, 1e-9);
  EXPECT_NEAR(w(1, 0), -0.1, 1e-9);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, MatchesScalarReference) {
  const AdamConfig cfg{0.01, 0.8, 0.99, 1e-8};
  Matrix w = Matrix::Constant(1, 1, 1.0);
  Adam opt(1, 1, cfg);
  double x = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 20; ++t) {
    const double g = 2 * x - 0.3 * t;
    Matrix gm = Matrix::Constant(1, 1, 2 * w(0, 0) - 0.3 * t);
    opt.step(w, gm);
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    x -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    EXPECT_NEAR(w(0, 0), x, 1e-14);
  }
}

TEST(Adam, ZeroLearningRateLeavesParameters) {
  Matrix w = Matrix::Random(3, 3);
  const Matrix before = w;
  Adam opt(3, 3, AdamConfig{0.0});
  opt.step(w, Matrix::Ones(3, 3));
  EXPECT_EQ(w, before);
}
