#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "pnn/core/error.hpp"
#include "pnn/core/metrics.hpp"

using namespace pnn;

TEST(Metrics, PerfectPredictionsAreDiagonal) {
  const std::vector<int> y{0, 1, 2, 2, 1};
  const auto cm = confusion_matrix(y, y, 3);
  EXPECT_EQ(cm.trace(), 5);
  EXPECT_EQ(cm.sum(), 5);
  EXPECT_EQ(cm(2, 2), 2);
  EXPECT_DOUBLE_EQ(accuracy(y, y), 1.0);
}

TEST(Metrics, AllWrongHasZeroDiagonal) {
  const std::vector<int> y{0, 1, 2};
  const std::vector<int> p{1, 2, 0};
  EXPECT_EQ(confusion_matrix(p, y, 3).trace(), 0);
  EXPECT_DOUBLE_EQ(accuracy(p, y), 0.0);
}

TEST(Metrics, HandCountedThreeClassCase) {
  const std::vector<int> p{0, 1, 2, 0};
  const std::vector<int> y{0, 1, 1, 2};
  const auto cm = confusion_matrix(p, y, 3);
  EXPECT_EQ(cm(1, 2), 1);  // true 1 predicted 2
  EXPECT_EQ(cm(2, 0), 1);
  EXPECT_EQ(cm.row(1).sum(), 2);
  EXPECT_DOUBLE_EQ(accuracy(p, y), 0.5);
}

TEST(Metrics, RowSumsAreClassCounts) {
  const std::vector<int> y{0, 0, 0, 1, 2, 2};
  const std::vector<int> p{1, 0, 2, 1, 0, 2};
  const auto cm = confusion_matrix(p, y, 3);
  EXPECT_EQ(cm.row(0).sum(), 3);
  EXPECT_EQ(cm.row(1).sum(), 1);
  EXPECT_EQ(cm.row(2).sum(), 2);
}

TEST(Metrics, EmptyOrMismatchedInputThrows) {
  const std::vector<int> empty;
  EXPECT_THROW(accuracy(empty, empty), std::invalid_argument);
  EXPECT_THROW(confusion_matrix(empty, empty, 2), std::invalid_argument);
  const std::vector<int> a{0}, b{0, 1};
  EXPECT_THROW(accuracy(a, b), ConsistencyError);
}
