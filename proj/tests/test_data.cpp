#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sepc/data.hpp"
#include "sepc/metrics.hpp"

using namespace sepc;

namespace {

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.kind == b.kind && a.dim == b.dim && a.num_classes == b.num_classes && a.features == b.features &&
         a.labels == b.labels && a.splits == b.splits && a.generator == b.generator && a.seed == b.seed &&
         a.params == b.params && a.lo == b.lo && a.hi == b.hi;
}

}  // namespace

TEST(GenBlobs, ShapeAndBalance) {
  auto ds = gen_blobs(4, 2001, 16, 0.4, 1);
  EXPECT_EQ(ds.size(), 2001u);
  EXPECT_EQ(ds.features.size(), 2001u * 16u);
  std::map<double, std::size_t> counts;
  for (double y : ds.labels) ++counts[y];
  ASSERT_EQ(counts.size(), 4u);
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end(),
                                      [](auto& a, auto& b) { return a.second < b.second; });
  EXPECT_LE(hi->second - lo->second, 1u);
}

TEST(GenBlobs, SplitFractions) {
  auto ds = gen_blobs(3, 1000, 4, 0.5, 2);
  EXPECT_EQ(ds.count(Split::kTrain), 700u);
  EXPECT_EQ(ds.count(Split::kDev), 150u);
  EXPECT_EQ(ds.count(Split::kTest), 150u);
}

TEST(GenBlobs, Deterministic) {
  EXPECT_TRUE(same_dataset(gen_blobs(4, 300, 8, 0.3, 5), gen_blobs(4, 300, 8, 0.3, 5)));
  EXPECT_FALSE(same_dataset(gen_blobs(4, 300, 8, 0.3, 5), gen_blobs(4, 300, 8, 0.3, 6)));
}

TEST(GenBlobs, TinySpreadIsSeparableByNearestMean) {
  auto ds = gen_blobs(4, 400, 8, 1e-3, 3);
  // Class means estimated on train; nearest-mean classification of test.
  std::vector<std::vector<double>> means(4, std::vector<double>(8, 0.0));
  std::vector<double> cnt(4, 0.0);
  for (auto i : ds.indices(Split::kTrain)) {
    auto c = static_cast<std::size_t>(ds.labels[i]);
    for (std::size_t q = 0; q < 8; ++q) means[c][q] += ds.row(i)[q];
    cnt[c] += 1;
  }
  for (std::size_t c = 0; c < 4; ++c)
    for (double& v : means[c]) v /= cnt[c];
  std::vector<std::size_t> preds, golds;
  for (auto i : ds.indices(Split::kTest)) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t c = 0; c < 4; ++c) {
      double d = 0;
      for (std::size_t q = 0; q < 8; ++q) d += std::pow(ds.row(i)[q] - means[c][q], 2);
      if (d < bd) bd = d, best = c;
    }
    preds.push_back(best);
    golds.push_back(static_cast<std::size_t>(ds.labels[i]));
  }
  EXPECT_EQ(macro_f1(preds, golds, 4), 1.0);
}

TEST(GenRegression, LabelsWithinRange) {
  auto ds = gen_regression(1000, 8, 0.5, 0.0, 5.0, 4);
  for (double y : ds.labels) {
    EXPECT_GE(y, 0.0);
    EXPECT_LE(y, 5.0);
  }
  EXPECT_EQ(ds.kind, TaskKind::kRegression);
  EXPECT_TRUE(same_dataset(ds, gen_regression(1000, 8, 0.5, 0.0, 5.0, 4)));
}

TEST(GenRegression, NoiselessTargetIsSmoothFunctionOfInput) {
  // Without noise the label is a deterministic function of x: a 1-nearest-
  // neighbour regressor on train predicts held-out labels almost perfectly
  // in low dimension.
  auto ds = gen_regression(3000, 2, 0.0, 0.0, 5.0, 8);
  auto train = ds.indices(Split::kTrain);
  std::vector<double> pred, gold;
  for (auto i : ds.indices(Split::kTest)) {
    double bd = 1e300, by = 0;
    for (auto j : train) {
      double d = std::pow(ds.row(i)[0] - ds.row(j)[0], 2) + std::pow(ds.row(i)[1] - ds.row(j)[1], 2);
      if (d < bd) bd = d, by = ds.labels[j];
    }
    pred.push_back(by);
    gold.push_back(ds.labels[i]);
  }
  EXPECT_GT(pearson(pred, gold), 0.97);
}

TEST(LabelNoise, ZeroRateUnchanged) {
  auto ds = gen_blobs(3, 300, 4, 0.5, 1);
  EXPECT_EQ(inject_label_noise(ds, 0.0, 9).labels, ds.labels);
}

TEST(LabelNoise, OnlyTrainTouchedAndCountExact) {
  auto ds = gen_blobs(4, 1000, 4, 0.5, 1);
  auto noisy = inject_label_noise(ds, 0.2, 3);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.splits[i] != Split::kTrain) {
      EXPECT_EQ(noisy.labels[i], ds.labels[i]);
    }
  EXPECT_EQ(noisy.features, ds.features);
  EXPECT_NE(noisy.params, ds.params);
}

TEST(LabelNoise, FullRateTwoClassesFlipsAboutHalf) {
  auto ds = gen_blobs(2, 1000, 4, 0.5, 1);
  double changed = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto noisy = inject_label_noise(ds, 1.0, s);
    for (auto i : ds.indices(Split::kTrain)) {
      changed += noisy.labels[i] != ds.labels[i];
      total += 1;
    }
  }
  // 14000 Bernoulli(1/2) draws: standard error about 0.0042
  EXPECT_NEAR(changed / total, 0.5, 0.02);
}

TEST(LabelNoise, RejectsRegressionAndBadRate) {
  EXPECT_THROW(inject_label_noise(gen_regression(50, 2, 0.1, 0, 1, 1), 0.1, 0), std::invalid_argument);
  EXPECT_THROW(inject_label_noise(gen_blobs(2, 50, 2, 0.1, 1), 1.5, 0), std::invalid_argument);
}

TEST(Subsample, FractionOneIsIdentity) {
  auto ds = gen_blobs(2, 200, 3, 0.5, 1);
  auto sub = subsample_train(ds, 1.0, 4);
  EXPECT_EQ(sub.labels, ds.labels);
  EXPECT_EQ(sub.features, ds.features);
}

TEST(Subsample, HalfOfHundredTrainRows) {
  Dataset ds;
  ds.dim = 1;
  ds.num_classes = 2;
  for (int i = 0; i < 120; ++i) {
    ds.features.push_back(i);
    ds.labels.push_back(i % 2);
    ds.splits.push_back(i < 100 ? Split::kTrain : Split::kDev);
  }
  auto sub = subsample_train(ds, 0.5, 7);
  EXPECT_EQ(sub.count(Split::kTrain), 50u);
  EXPECT_EQ(sub.count(Split::kDev), 20u);
  // features encode original index: retained rows are original train rows, in order
  double prev = -1;
  for (auto i : sub.indices(Split::kTrain)) {
    EXPECT_LT(sub.features[i], 100.0);
    EXPECT_GT(sub.features[i], prev);
    prev = sub.features[i];
  }
}

TEST(Csv, RoundTrip) {
  for (const auto& ds : {inject_label_noise(gen_blobs(3, 120, 5, 0.7, 11), 0.1, 2),
                         gen_regression(90, 3, 0.2, 1.0, 5.0, 12)}) {
    std::stringstream ss;
    write_csv(ss, ds);
    EXPECT_TRUE(same_dataset(read_csv(ss), ds));
  }
}

TEST(Csv, NonNumericCellNamesLine) {
  std::stringstream ss("split,y,x0,x1\ntrain,0,1.0,2.0\ntrain,1,abc,2.0\n");
  try {
    read_csv(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Csv, EmptyFileIsError) {
  std::stringstream ss("");
  EXPECT_THROW(read_csv(ss), ParseError);
}

TEST(Csv, RaggedRowIsError) {
  std::stringstream ss("split,y,x0,x1\ntrain,0,1.0\n");
  EXPECT_THROW(read_csv(ss), ParseError);
}

TEST(Csv, MissingFile) { EXPECT_THROW(load_csv("/nonexistent/dir/data.csv"), std::runtime_error); }
