#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sepc/prob_coder.hpp"

using namespace sepc;

namespace {

Tensor gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return standard_normal(rows, cols, rng);
}

}  // namespace

TEST(Encode, ZeroParamsGiveStandardPosterior) {
  auto p = EncoderParams::zeros({5, {4}, 3});
  auto post = encode(p, gaussian(6, 5, 1));
  EXPECT_EQ(post.mu.shape(), (Shape{6, 3}));
  EXPECT_EQ(post.logvar.shape(), (Shape{6, 3}));
  for (double v : post.mu.values()) EXPECT_EQ(v, 0.0);
  for (double v : post.logvar.values()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, InputWidthChecked) {
  auto p = EncoderParams::init({5, {4}, 3}, 0);
  EXPECT_THROW(encode(p, Tensor::zeros({2, 4})), DimensionError);
}

TEST(Encode, FirstLayerGradientOfMeanSum) {
  auto p = EncoderParams::init({4, {6, 5}, 2}, 3);
  for (auto& l : p.layers)
    for (double& b : l.bias.mutable_values()) b = 0.05;
  Tensor x = gaussian(7, 4, 2);
  EXPECT_LT(finite_difference_check([&] { return sum(encode(p, x).mu); }, {p.layers[0].weight}), 1e-6);
}

TEST(Encode, CloneIsIndependent) {
  auto p = EncoderParams::init({3, {4}, 2}, 5);
  auto q = p.clone();
  q.layers[0].weight.mutable_values()[0] += 1.0;
  EXPECT_NE(p.layers[0].weight.at(0), q.layers[0].weight.at(0));
  EXPECT_TRUE(q.layers[0].weight.requires_grad());
}

TEST(Reparameterize, IdentityAtStandardPosterior) {
  GaussianPosterior post{Tensor::zeros({2, 2}), Tensor::zeros({2, 2})};
  Tensor eps = Tensor::from({2, 2}, {0.3, -1.2, 2.0, 0.0});
  Tensor z = reparameterize(post, eps);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(z.at(i), eps.at(i));
}

TEST(Reparameterize, ClampedLogvarCollapsesToMean) {
  auto p = EncoderParams::zeros({1, {}, 1});
  p.layers[0].bias.mutable_values()[0] = 0.8;    // mu
  p.layers[0].bias.mutable_values()[1] = -80.0;  // logvar, clamped to -10
  auto post = encode(p, Tensor::zeros({1, 1}));
  EXPECT_EQ(post.logvar.item(), kLogvarMin);
  Tensor eps = Tensor::from({1, 1}, {3.0});
  EXPECT_LE(std::fabs(reparameterize(post, eps).item() - 0.8), std::exp(-5.0) * 3.0 + 1e-15);
}

TEST(Reparameterize, MonteCarloMoments) {
  const double mu = 0.7, logvar = -0.6, sigma = std::exp(0.5 * logvar);
  const std::size_t n = 1'000'000;
  GaussianPosterior post{Tensor::full({n, 1}, mu), Tensor::full({n, 1}, logvar)};
  Tensor z = reparameterize(post, gaussian(n, 1, 17));
  double s = 0.0, ss = 0.0;
  for (double v : z.values()) s += v;
  const double m = s / n;
  for (double v : z.values()) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / (n - 1));
  EXPECT_LT(std::fabs(m - mu), 3.0 * sigma / std::sqrt(double(n)));
  EXPECT_LT(std::fabs(sd - sigma), 3.0 * sigma / std::sqrt(2.0 * (n - 1)));
}

TEST(Kl, ZeroAtPrior) {
  GaussianPosterior post{Tensor::zeros({3, 4}), Tensor::zeros({3, 4})};
  EXPECT_EQ(kl_to_standard_normal(post).item(), 0.0);
}

TEST(Kl, UnitMeanShift) {
  GaussianPosterior post{Tensor::from({1, 1}, {1.0}), Tensor::zeros({1, 1})};
  EXPECT_DOUBLE_EQ(kl_to_standard_normal(post).item(), 0.5);
}

TEST(Kl, AveragedOverBatchSummedOverDims) {
  GaussianPosterior post{Tensor::from({2, 2}, {1.0, 0.0, 0.0, 2.0}), Tensor::zeros({2, 2})};
  // rows: 0.5 and 2.0 -> mean 1.25
  EXPECT_DOUBLE_EQ(kl_to_standard_normal(post).item(), 1.25);
}

TEST(Kl, MonteCarloAgreement) {
  const std::vector<double> mu{0.4, -1.1}, lv{0.5, -0.8};
  GaussianPosterior post{Tensor::from({1, 2}, mu), Tensor::from({1, 2}, lv)};
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  double acc = 0.0;
  const std::size_t n = 1'000'000;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t q = 0; q < 2; ++q) {
      const double e = g(rng), z = mu[q] + std::exp(0.5 * lv[q]) * e;
      acc += -0.5 * lv[q] - 0.5 * e * e + 0.5 * z * z;
    }
  EXPECT_NEAR(kl_to_standard_normal(post).item(), acc / n, 1e-2);
}

TEST(PredictClassification, ValuesAndShiftInvariance) {
  Tensor p = predict_classification(Tensor::zeros({1, 2}), 2);
  EXPECT_EQ(p.at(0), 0.5);
  EXPECT_EQ(p.at(1), 0.5);
  Tensor z = Tensor::from({2, 3}, {0.1, 2.0, -1.0, 3.0, 0.0, 0.5});
  Tensor a = predict_classification(z, 3), b = predict_classification(z + 4.0, 3);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a.at(i), b.at(i), 1e-15);
  EXPECT_EQ(argmax_rows(predict_classification(Tensor::from({1, 2}, {2.0, 0.0}), 2))[0], 0u);
  EXPECT_THROW(predict_classification(z, 2), DimensionError);
}

TEST(PredictRegression, IdentityReadout) {
  Tensor y = predict_regression(Tensor::from({1, 1}, {0.7}));
  EXPECT_EQ(y.shape(), (Shape{1}));
  EXPECT_EQ(y.at(0), 0.7);
  EXPECT_EQ(predict_regression(Tensor::zeros({5, 1})).shape(), (Shape{5}));
}

TEST(PredictRegression, MseGradientThroughHead) {
  Tensor z = Tensor::from({3, 1}, {0.2, -1.0, 2.5}, true);
  std::vector<double> t{1.0, 0.0, 2.0};
  EXPECT_LT(finite_difference_check([&] { return mse(predict_regression(z), t); }, {z}), 1e-6);
}

TEST(TaskLoss, CrossEntropyCases) {
  std::vector<double> labels{0, 1};
  Tensor perfect = Tensor::from({2, 2}, {1, 0, 0, 1});
  EXPECT_NEAR(task_loss(perfect, labels, LossKind::kCrossEntropy).item(), 0.0, 1e-12);
  Tensor uniform = Tensor::full({2, 4}, 0.25);
  EXPECT_NEAR(task_loss(uniform, labels, LossKind::kCrossEntropy).item(), std::log(4.0), 1e-15);
  std::vector<double> bad{0.5};
  EXPECT_THROW(task_loss(Tensor::full({1, 2}, 0.5), bad, LossKind::kCrossEntropy), std::invalid_argument);
}

TEST(TaskLoss, MseZeroAtTarget) {
  std::vector<double> t{1.5, -2.0};
  EXPECT_EQ(task_loss(Tensor::from({2}, t), t, LossKind::kMse).item(), 0.0);
}

TEST(TotalLoss, Combinations) {
  auto b = total_loss(2.0, 0.5, 0.3, 0.0, 0.0);
  EXPECT_EQ(b.total, 2.0);
  auto no_se = total_loss(2.0, 0.5, 0.3, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(no_se.total, 2.0 + 0.1 * 0.5);
  auto up = total_loss(2.0, 0.5, 0.3 + 0.25, 0.1, 1.0);
  auto base = total_loss(2.0, 0.5, 0.3, 0.1, 1.0);
  EXPECT_NEAR(base.total - up.total, 0.25, 1e-15);
}

TEST(Objective, SingleRowBatchHasNoSeTerm) {
  ObjectiveConfig cfg;
  cfg.num_classes = 2;
  cfg.gamma = 1.0;
  auto p = EncoderParams::init({3, {4}, 2}, 1);
  std::vector<double> y{1};
  std::vector<Tensor> noise{Tensor::zeros({1, 2})};
  auto terms = compute_objective(p, gaussian(1, 3, 4), y, noise, cfg);
  EXPECT_EQ(terms.se.item(), 0.0);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  for (auto task : {TaskKind::kClassification, TaskKind::kRegression}) {
    for (auto softening : {LabelSoftening::kSoft, LabelSoftening::kHard}) {
      ObjectiveConfig cfg;
      cfg.task = task;
      cfg.num_classes = 3;
      cfg.bins = make_bins(0, 5, 5);
      cfg.softening = softening;
      cfg.beta = 0.3;
      cfg.gamma = 1.0;
      auto p = EncoderParams::init({4, {6}, cfg.latent_dim()}, 9);
      std::vector<double> y = task == TaskKind::kClassification ? std::vector<double>{0, 1, 2, 0, 1, 2, 0, 1}
                                                                : std::vector<double>{0.2, 1.4, 2.5, 3.3, 4.9, 0.8, 2.2, 3.7};
      Tensor x = gaussian(8, 4, 10);
      std::mt19937_64 rng(11);
      std::vector<Tensor> noise{standard_normal(8, cfg.latent_dim(), rng), standard_normal(8, cfg.latent_dim(), rng)};
      auto f = [&] { return compute_objective(p, x, y, noise, cfg).total; };
      EXPECT_LT(finite_difference_check(f, p.tensors()), 1e-4);
    }
  }
}

TEST(Objective, MuGraphOption) {
  ObjectiveConfig cfg;
  cfg.num_classes = 2;
  cfg.gamma = 1.0;
  cfg.use_mu_for_graph = true;
  auto p = EncoderParams::init({3, {4}, 2}, 2);
  Tensor x = gaussian(6, 3, 12);
  std::vector<double> y{0, 1, 0, 1, 1, 0};
  std::mt19937_64 rng(13);
  std::vector<Tensor> a{standard_normal(6, 2, rng)}, b{standard_normal(6, 2, rng)};
  EXPECT_EQ(compute_objective(p, x, y, a, cfg).se.item(), compute_objective(p, x, y, b, cfg).se.item());
  auto post = encode(p, x);
  std::vector<std::size_t> labels{0, 1, 0, 1, 1, 0};
  EXPECT_EQ(compute_objective(p, x, y, a, cfg).se.item(),
            se_loss_matrix(build_adjacency(post.mu), hard_assignment(labels, 2)).item());
}
