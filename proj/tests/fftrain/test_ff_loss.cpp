#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd.hpp"
#include "pnn/fftrain/ff_loss.hpp"

using namespace pnn;
using namespace pnn::fftrain;

namespace {

Matrix gaussian(int r, int c, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix m(r, c);
  for (auto& v : m.reshaped()) v = scale * n01(rng);
  return m;
}

}  // namespace

TEST(Goodness, SimpleRows) {
  Matrix y(2, 3);
  y << 0, 0, 0, 1, 2, 2;
  const Vector g = goodness(y);
  EXPECT_EQ(g(0), 0.0);
  EXPECT_EQ(g(1), 9.0);
}

TEST(Goodness, MatchesScalarLoop) {
  const Matrix y = gaussian(16, 32, 1);
  const Vector g = goodness(y);
  for (int i = 0; i < 16; ++i) {
    double acc = 0;
    for (int j = 0; j < 32; ++j) acc += y(i, j) * y(i, j);
    EXPECT_NEAR(g(i), acc, 1e-12);
  }
}

TEST(FfLoss, EqualGoodnessIsLogTwo) {
  EXPECT_NEAR(ff_loss(3.0, 3.0, 1.7), std::log(2.0), 1e-15);
  EXPECT_NEAR(ff_loss(3.0, 3.0, 1.7), 0.693147, 1e-6);
}

TEST(FfLoss, ExtremeMarginsStayFinite) {
  const long double big = 700.0L;
  const long double tiny_ref = std::log1p(std::exp(-big));
  const double loss_good = ff_loss(700.0, 0.0, 1.0);
  EXPECT_TRUE(std::isfinite(loss_good));
  EXPECT_NEAR(loss_good / static_cast<double>(tiny_ref), 1.0, 1e-12);
  const double loss_bad = ff_loss(0.0, 700.0, 1.0);
  EXPECT_NEAR(loss_bad, static_cast<double>(big + std::log1p(std::exp(-big))), 1e-12);
  EXPECT_TRUE(std::isfinite(ff_loss(0.0, 1e300, 1.0)));
}

TEST(FfLoss, MonotoneInEachGoodness) {
  for (double gp : {-3.0, 0.0, 0.5, 4.0}) {
    for (double gn : {-2.0, 0.1, 3.0}) {
      const double h = 1e-6;
      EXPECT_LT(ff_loss(gp + h, gn, 0.8), ff_loss(gp - h, gn, 0.8));
      EXPECT_GT(ff_loss(gp, gn + h, 0.8), ff_loss(gp, gn - h, 0.8));
      EXPECT_GE(ff_loss(gp, gn, 0.8), 0.0);
    }
  }
}

TEST(FfLossGrad, ZeroWhenPositiveEqualsNegative) {
  const Matrix w = gaussian(5, 7, 1);
  const Matrix h = gaussian(9, 7, 2);
  EXPECT_EQ(ff_loss_grad(w, h, h, 1.3), Matrix::Zero(5, 7));
  EXPECT_EQ(ff_loss_grad(w * 3.0, h, h, 1.3), Matrix::Zero(5, 7));
}

TEST(FfLossGrad, MatchesFiniteDifferences) {
  for (int probe = 0; probe < 20; ++probe) {
    const Matrix w = gaussian(8, 8, 10 + probe, 0.4);
    const Matrix hp = gaussian(6, 8, 40 + probe), hn = gaussian(6, 8, 70 + probe);
    const double theta = 0.3 + 0.1 * probe;
    const Matrix fd = pnn::testing::central_difference(
        [&](const Matrix& z) {
          double total = 0;
          for (int b = 0; b < 6; ++b) {
            double gp = 0, gn = 0;
            for (int k = 0; k < 8; ++k) {
              double yp = 0, yn = 0;
              for (int j = 0; j < 8; ++j) yp += z(k, j) * hp(b, j), yn += z(k, j) * hn(b, j);
              gp += yp * yp;
              gn += yn * yn;
            }
            total += std::log1p(std::exp(-theta * (gp - gn)));
          }
          return total / 6;
        },
        w);
    EXPECT_LT(pnn::testing::relative_error(ff_loss_grad(w, hp, hn, theta), fd), 1e-6) << "probe " << probe;
  }
}

TEST(FfLossGrad, LossMatchesSampleLoss) {
  const Matrix w = gaussian(4, 5, 1), hp = gaussian(3, 5, 2), hn = gaussian(3, 5, 3);
  const Vector gp = goodness(hp * w.transpose()), gn = goodness(hn * w.transpose());
  const double expected = (ff_loss(gp(0), gn(0), 2) + ff_loss(gp(1), gn(1), 2) + ff_loss(gp(2), gn(2), 2)) / 3;
  EXPECT_NEAR(ff_loss_and_grad(w, hp, hn, 2).loss, expected, 1e-14);
  EXPECT_NEAR(ff_batch_loss(w, hp, hn, 2), expected, 1e-14);
}

TEST(Normalize, UnitRowShrinksByEps) {
  Matrix y(1, 2);
  y << 0.6, 0.8;
  EXPECT_NEAR(normalize_direction(y, 1e-3).norm(), 1.0 / (1.0 + 1e-3), 1e-15);
}

TEST(Normalize, ScaleInvariantAndSafeAtZero) {
  const Matrix y = gaussian(4, 6, 1);
  // the two differ by about eps / |y|, so a tiny eps makes them agree to 1e-12
  EXPECT_LT((normalize_direction(y, 1e-13) - normalize_direction(5 * y, 1e-13)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((normalize_direction(y, 1e-8) - normalize_direction(5 * y, 1e-8)).cwiseAbs().maxCoeff(), 1e-8);
  const Matrix z = normalize_direction(Matrix::Zero(2, 3), 1e-8);
  EXPECT_TRUE(z.allFinite());
  EXPECT_EQ(z, Matrix::Zero(2, 3));
}

TEST(LayerInput, WithoutSkipPassesNormalisedOutput) {
  const Matrix prev = normalize_direction(gaussian(3, 4, 1), 1e-8);
  EXPECT_EQ(layer_input(1, prev, gaussian(3, 9, 2), false, 1e-8), prev);
}

TEST(LayerInput, SkipKeepsInputBlockWhenLayerOutputIsZero) {
  const Matrix x0 = gaussian(3, 5, 2);
  const Matrix in = layer_input(1, normalize_direction(Matrix::Zero(3, 4), 1e-8), x0, true, 1e-8);
  ASSERT_EQ(in.cols(), 9);
  EXPECT_EQ(in.leftCols(4), Matrix::Zero(3, 4));
  EXPECT_EQ(in.rightCols(5), normalize_direction(x0, 1e-8));
  EXPECT_GT(in.rightCols(5).norm(), 1.0);
}
