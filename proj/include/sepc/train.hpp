#pragma once

// Mini-batch training with Adam, linear warm-up, dev-based early stopping,
// and deterministic evaluation at the posterior mean.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepc/data.hpp"
#include "sepc/metrics.hpp"
#include "sepc/prob_coder.hpp"
#include "sepc/soft_partition.hpp"
#include "sepc/task.hpp"

namespace sepc {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions opts = {}) : params_(std::move(params)), opts_(opts) {
    for (const auto& p : params_) {
      m_.emplace_back(p.numel(), 0.0);
      v_.emplace_back(p.numel(), 0.0);
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      if (!p.has_grad()) continue;
      auto g = p.grad();
      auto w = p.mutable_values();
      for (std::size_t i = 0; i < w.size(); ++i) {
        m_[k][i] = opts_.beta1 * m_[k][i] + (1.0 - opts_.beta1) * g[i];
        v_[k][i] = opts_.beta2 * v_[k][i] + (1.0 - opts_.beta2) * g[i] * g[i];
        w[i] -= lr * (m_[k][i] / c1) / (std::sqrt(v_[k][i] / c2) + opts_.eps);
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  AdamOptions opts_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  double beta = 1e-2;
  double gamma = 1e-1;
  double lr = 1e-3;
  std::size_t epochs = 20;
  std::size_t patience = 5;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  TaskKind task = TaskKind::kClassification;
  std::size_t num_classes = 2;   // classification
  std::size_t bins = 5;          // regression: intermediate nodes
  double lo = 0.0, hi = 0.0;     // regression: binned label range
  LabelSoftening softening = LabelSoftening::kSoft;
  double temperature = 1.0;

  bool use_mu_for_graph = false;
  std::size_t samples_per_input = 1;
  std::vector<std::size_t> hidden{64};
  double warmup_fraction = 0.1;
  bool error_on_empty_class = false;
  AdamOptions adam;

  /// Copies task kind, class count and label range from a dataset.
  TrainConfig& adopt_task(const Dataset& ds) {
    task = ds.kind;
    if (ds.kind == TaskKind::kClassification) num_classes = ds.num_classes;
    else {
      lo = ds.lo;
      hi = ds.hi;
    }
    return *this;
  }

  void validate() const {
    if (!(beta >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("beta and gamma must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (patience > epochs) throw std::invalid_argument("patience must not exceed epochs");
    if (batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
    if (samples_per_input == 0) throw std::invalid_argument("samples_per_input must be positive");
    if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
      throw std::invalid_argument("warmup_fraction must lie in [0,1]");
    if (task == TaskKind::kClassification && num_classes < 2)
      throw std::invalid_argument("classification needs at least 2 classes");
    if (task == TaskKind::kRegression) make_bins(lo, hi, bins);
  }

  ObjectiveConfig objective() const {
    ObjectiveConfig o;
    o.task = task;
    o.num_classes = num_classes;
    if (task == TaskKind::kRegression) o.bins = make_bins(lo, hi, bins);
    o.softening = softening;
    o.temperature = temperature;
    o.beta = beta;
    o.gamma = gamma;
    o.use_mu_for_graph = use_mu_for_graph;
    o.se.error_on_empty_class = error_on_empty_class;
    return o;
  }

  EncoderConfig encoder(std::size_t input_dim) const {
    return {input_dim, hidden, task == TaskKind::kClassification ? num_classes : std::size_t{1}};
  }
};

class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(std::size_t step, std::size_t epoch, LossBreakdown b)
      : std::runtime_error("non-finite loss at step " + std::to_string(step) + " (epoch " +
                           std::to_string(epoch) + ")"),
        step_(step), epoch_(epoch), breakdown_(b) {}
  std::size_t step() const { return step_; }
  std::size_t epoch() const { return epoch_; }
  const LossBreakdown& breakdown() const { return breakdown_; }

 private:
  std::size_t step_, epoch_;
  LossBreakdown breakdown_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double task = 0.0, kl = 0.0, se = 0.0, total = 0.0;
  double dev_metric = 0.0;
};

struct MetricsReport {
  TaskKind task = TaskKind::kClassification;
  std::string split;
  std::size_t count = 0;
  // classification
  std::vector<double> per_class_f1;
  std::optional<double> macro_f1, macro_recall, accuracy;
  // regression
  std::optional<double> pearson, spearman;
  LossBreakdown losses;  // batch means at the posterior mean
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  /// macro-F1 for classification, Spearman for regression.
  double headline() const {
    return task == TaskKind::kClassification ? macro_f1.value_or(0.0) : spearman.value_or(0.0);
  }
};

struct TrainResult {
  EncoderParams params;  // best-dev parameters
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_dev_metric = -std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

namespace detail {

/// Consecutive chunks of `batch`; a trailing singleton joins the previous chunk.
inline std::vector<std::span<const std::size_t>> make_batches(std::span<const std::size_t> idx,
                                                              std::size_t batch) {
  std::vector<std::span<const std::size_t>> out;
  for (std::size_t s = 0; s < idx.size(); s += batch) out.push_back(idx.subspan(s, std::min(batch, idx.size() - s)));
  if (out.size() > 1 && out.back().size() < 2) {
    auto last = out.back();
    out.pop_back();
    out.back() = idx.subspan(out.back().data() - idx.data(), out.back().size() + last.size());
  }
  return out;
}

inline std::vector<Tensor> zero_noise(std::size_t rows, std::size_t cols) {
  return {Tensor::zeros({rows, cols})};
}

}  // namespace detail

/// Evaluates with z = mu, so repeated calls are identical.
inline MetricsReport evaluate(const EncoderParams& params, const Dataset& ds, Split split,
                              const TrainConfig& cfg) {
  auto idx = ds.indices(split);
  if (idx.empty()) throw std::invalid_argument("evaluation split '" + std::string(to_string(split)) + "' is empty");
  const ObjectiveConfig obj = cfg.objective();
  MetricsReport rep;
  rep.task = cfg.task;
  rep.split = std::string(to_string(split));
  rep.count = idx.size();
  rep.seed = cfg.seed;

  std::vector<double> means;  // mu per row, row-major
  const std::size_t latent = obj.latent_dim();
  double task = 0.0, kl = 0.0, se = 0.0;
  for (auto b : detail::make_batches(idx, cfg.batch_size)) {
    Tensor x = ds.feature_tensor(b);
    auto y = ds.label_values(b);
    auto post = encode(params, x);
    means.insert(means.end(), post.mu.values().begin(), post.mu.values().end());
    const double w = static_cast<double>(b.size()) / static_cast<double>(idx.size());
    if (b.size() >= 2) {
      auto terms = compute_objective(params, x, y, detail::zero_noise(b.size(), latent), obj);
      task += w * terms.task.item();
      kl += w * terms.kl.item();
      se += w * terms.se.item();
    } else {
      rep.warnings.push_back("single-row split: structural entropy not evaluated");
      Tensor t = cfg.task == TaskKind::kClassification
                     ? task_loss(predict_classification(post.mu, cfg.num_classes), y, LossKind::kCrossEntropy)
                     : task_loss(predict_regression(post.mu), y, LossKind::kMse);
      task += w * t.item();
      kl += w * kl_to_standard_normal(post).item();
    }
  }
  rep.losses = total_loss(task, kl, se, cfg.beta, cfg.gamma);

  if (cfg.task == TaskKind::kClassification) {
    Tensor mu = Tensor::from({idx.size(), latent}, std::move(means));
    auto preds = argmax_rows(mu);
    auto golds = ds.class_labels(idx);
    rep.per_class_f1 = per_class_f1(preds, golds, cfg.num_classes);
    rep.macro_f1 = macro_f1(preds, golds, cfg.num_classes);
    rep.macro_recall = macro_recall(preds, golds, cfg.num_classes);
    rep.accuracy = accuracy(preds, golds);
  } else {
    auto golds = ds.label_values(idx);
    if (idx.size() >= 2) {
      if (is_constant(means) || is_constant(golds))
        rep.warnings.push_back("constant predictions or labels: correlations reported as 0");
      rep.pearson = pearson(means, golds);
      rep.spearman = spearman(means, golds);
    } else {
      rep.warnings.push_back("single-row split: correlations undefined");
    }
  }
  return rep;
}

/// Trains on the train split, selects on dev. Deterministic given cfg.seed.
inline TrainResult train(const TrainConfig& cfg, const Dataset& ds) {
  cfg.validate();
  if (ds.kind != cfg.task) throw std::invalid_argument("dataset task kind does not match config");
  if (cfg.task == TaskKind::kClassification && ds.num_classes != cfg.num_classes)
    throw std::invalid_argument("dataset class count does not match config");
  auto train_idx = ds.indices(Split::kTrain);
  if (train_idx.size() < 2) throw std::invalid_argument("training split needs at least 2 rows");
  if (ds.count(Split::kDev) == 0) throw std::invalid_argument("dev split is empty");

  const ObjectiveConfig obj = cfg.objective();
  TrainResult res;
  EncoderParams params = EncoderParams::init(cfg.encoder(ds.dim), cfg.seed);
  Adam opt(params.tensors(), cfg.adam);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t batches_per_epoch = detail::make_batches(train_idx, cfg.batch_size).size();
  const std::size_t total_steps = batches_per_epoch * cfg.epochs;
  const auto warmup = static_cast<std::size_t>(std::ceil(cfg.warmup_fraction * static_cast<double>(total_steps)));
  const std::size_t latent = obj.latent_dim();

  res.params = params.clone();
  std::size_t bad_epochs = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t seen = 0;
    for (auto b : detail::make_batches(train_idx, cfg.batch_size)) {
      Tensor x = ds.feature_tensor(b);
      auto y = ds.label_values(b);
      std::vector<Tensor> noise;
      for (std::size_t s = 0; s < cfg.samples_per_input; ++s) noise.push_back(standard_normal(b.size(), latent, rng));
      auto terms = compute_objective(params, x, y, noise, obj);
      const LossBreakdown lb = terms.breakdown(cfg.beta, cfg.gamma);
      if (!std::isfinite(lb.total)) throw NonFiniteLossError(res.steps, epoch, lb);

      opt.zero_grad();
      backward(terms.total);
      const double lr = warmup > 0 && res.steps < warmup
                            ? cfg.lr * static_cast<double>(res.steps + 1) / static_cast<double>(warmup)
                            : cfg.lr;
      opt.step(lr);
      ++res.steps;

      const double w = static_cast<double>(b.size());
      rec.task += w * lb.task;
      rec.kl += w * lb.kl;
      rec.se += w * lb.se;
      rec.total += w * lb.total;
      seen += b.size();
    }
    rec.task /= static_cast<double>(seen);
    rec.kl /= static_cast<double>(seen);
    rec.se /= static_cast<double>(seen);
    rec.total /= static_cast<double>(seen);
    rec.dev_metric = evaluate(params, ds, Split::kDev, cfg).headline();
    res.history.push_back(rec);

    if (rec.dev_metric > res.best_dev_metric) {
      res.best_dev_metric = rec.dev_metric;
      res.best_epoch = epoch;
      res.params = params.clone();
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  return res;
}

}  // namespace sepc
