#include <gtest/gtest.h>

#include <cmath>

#include "sepc/metrics.hpp"

using namespace sepc;

TEST(MacroF1, PerfectPredictions) {
  std::vector<std::size_t> y{0, 1, 1, 0};
  EXPECT_EQ(macro_f1(y, y, 2), 1.0);
  EXPECT_EQ(accuracy(y, y), 1.0);
  EXPECT_EQ(macro_recall(y, y, 2), 1.0);
}

TEST(MacroF1, AllZeroPredictions) {
  std::vector<std::size_t> preds{0, 0}, golds{0, 1};
  auto f1 = per_class_f1(preds, golds, 2);
  EXPECT_DOUBLE_EQ(f1[0], 2.0 / 3.0);
  EXPECT_EQ(f1[1], 0.0);
  EXPECT_DOUBLE_EQ(macro_f1(preds, golds, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(macro_recall(preds, golds, 2), 0.5);
}

TEST(MacroF1, AbsentClassScoresZero) {
  std::vector<std::size_t> y{0, 1};
  EXPECT_DOUBLE_EQ(macro_f1(y, y, 3), 2.0 / 3.0);
}

TEST(MacroF1, RelabelingInvariant) {
  std::vector<std::size_t> preds{0, 2, 1, 1, 0, 2, 2}, golds{0, 1, 1, 2, 0, 2, 0};
  const std::vector<std::size_t> map{2, 0, 1};
  std::vector<std::size_t> p2, g2;
  for (auto p : preds) p2.push_back(map[p]);
  for (auto g : golds) g2.push_back(map[g]);
  EXPECT_DOUBLE_EQ(macro_f1(preds, golds, 3), macro_f1(p2, g2, 3));
}

TEST(MacroF1, LengthMismatchThrows) {
  std::vector<std::size_t> a{0, 1}, b{0};
  EXPECT_THROW(macro_f1(a, b, 2), std::invalid_argument);
}

TEST(Correlation, IdentityAndNegation) {
  std::vector<double> x{0.3, -1.0, 2.5, 4.0}, neg;
  for (double v : x) neg.push_back(-v);
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-15);
  EXPECT_NEAR(spearman(x, neg), -1.0, 1e-15);
}

TEST(Correlation, MonotoneNonlinear) {
  std::vector<double> x{1, 2, 3}, y{1, 4, 9};
  EXPECT_DOUBLE_EQ(spearman(x, y), 1.0);
  const double mx = 2, my = 14.0 / 3.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_NEAR(pearson(x, y), sxy / std::sqrt(sxx * syy), 1e-15);
  EXPECT_LT(pearson(x, y), 1.0);
}

TEST(Correlation, TiesAverageRanks) {
  std::vector<double> x{10, 20, 20, 30};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  std::vector<double> y{1, 2, 3, 4};
  // Pearson of [1, 2.5, 2.5, 4] with [1, 2, 3, 4]: sxy = 4.5, sxx = 4.5, syy = 5
  EXPECT_NEAR(spearman(x, y), 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
}

TEST(Correlation, ConstantInputIsZero) {
  std::vector<double> c{2, 2, 2}, y{1, 2, 3};
  EXPECT_EQ(pearson(c, y), 0.0);
  EXPECT_EQ(spearman(y, c), 0.0);
}

TEST(Correlation, TooShortThrows) {
  std::vector<double> a{1};
  EXPECT_THROW(pearson(a, a), std::invalid_argument);
}
