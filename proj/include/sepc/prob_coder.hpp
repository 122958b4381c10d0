#pragma once

// Encoder-only probabilistic coder: an MLP maps inputs to diagonal Gaussian
// posteriors, latents are sampled with the reparameterization trick and read
// out directly (softmax for classification, identity for regression).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepc/soft_partition.hpp"
#include "sepc/structural_entropy.hpp"
#include "sepc/task.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

struct EncoderConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{64};
  std::size_t latent_dim = 0;
};

struct Layer {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out
};

/// MLP input_dim -> hidden... -> 2 * latent_dim. The first latent_dim outputs
/// of the final layer are the mean head, the rest the log-variance head.
struct EncoderParams {
  EncoderConfig config;
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  static EncoderParams zeros(const EncoderConfig& cfg) {
    EncoderParams p;
    p.config = cfg;
    for (auto [in, out] : p.layer_dims())
      p.layers.push_back({Tensor::zeros({in, out}, true), Tensor::zeros({1, out}, true)});
    return p;
  }

  /// Glorot-uniform weights, zero biases.
  static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed) {
    EncoderParams p = zeros(cfg);
    p.seed = seed;
    std::mt19937_64 rng(seed);
    for (auto& layer : p.layers) {
      const double in = static_cast<double>(layer.weight.dim(0));
      const double out = static_cast<double>(layer.weight.dim(1));
      std::uniform_real_distribution<double> u(-std::sqrt(6.0 / (in + out)),
                                               std::sqrt(6.0 / (in + out)));
      for (double& w : layer.weight.mutable_values()) w = u(rng);
    }
    return p;
  }

  std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const {
    if (config.input_dim == 0 || config.latent_dim == 0)
      throw std::invalid_argument("encoder dims must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    std::size_t prev = config.input_dim;
    for (std::size_t h : config.hidden) {
      if (h == 0) throw std::invalid_argument("hidden width must be positive");
      dims.emplace_back(prev, h);
      prev = h;
    }
    dims.emplace_back(prev, 2 * config.latent_dim);
    return dims;
  }

  std::vector<Tensor> tensors() const {
    std::vector<Tensor> t;
    for (const auto& l : layers) {
      t.push_back(l.weight);
      t.push_back(l.bias);
    }
    return t;
  }

  /// Deep copy with fresh graph nodes.
  EncoderParams clone() const {
    EncoderParams p;
    p.config = config;
    p.seed = seed;
    for (const auto& l : layers) {
      Tensor w = l.weight.detach(), b = l.bias.detach();
      p.layers.push_back({Tensor::from(w.shape(), {w.values().begin(), w.values().end()}, true),
                          Tensor::from(b.shape(), {b.values().begin(), b.values().end()}, true)});
    }
    return p;
  }
};

struct GaussianPosterior {
  Tensor mu;      // batch x latent
  Tensor logvar;  // batch x latent, clamped to [kLogvarMin, kLogvarMax]
};

inline GaussianPosterior encode(const EncoderParams& params, const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != params.config.input_dim)
    throw DimensionError("encoder expects batch x " + std::to_string(params.config.input_dim) +
                         " input, got " + shape_string(x.shape()));
  if (params.layers.empty()) throw std::invalid_argument("encoder has no layers");
  const Tensor ones = Tensor::ones({x.dim(0), 1});
  Tensor h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    h = matmul(h, layer.weight) + matmul(ones, layer.bias);
    if (l + 1 < params.layers.size()) h = relu(h);
  }
  const std::size_t latent = params.config.latent_dim;
  return {narrow(h, 1, 0, latent), clamp(narrow(h, 1, latent, latent), kLogvarMin, kLogvarMax)};
}

/// z = mu + exp(logvar / 2) * noise.
inline Tensor reparameterize(const GaussianPosterior& post, const Tensor& noise) {
  if (noise.shape() != post.mu.shape())
    throw DimensionError("noise shape " + shape_string(noise.shape()) + " differs from posterior " +
                         shape_string(post.mu.shape()));
  return post.mu + exp(post.logvar * 0.5) * noise;
}

/// Standard-normal draws shaped like a batch x latent posterior.
inline Tensor standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = nd(rng);
  return Tensor::from({rows, cols}, std::move(v));
}

/// Batch mean of KL[N(mu, diag(exp(logvar))) || N(0, I)], closed form.
inline Tensor kl_to_standard_normal(const GaussianPosterior& post) {
  Tensor per = square(post.mu) + exp(post.logvar) - 1.0 - post.logvar;
  return sum(per) * (0.5 / static_cast<double>(post.mu.dim(0)));
}

inline Tensor predict_classification(const Tensor& z, std::size_t num_classes) {
  if (z.rank() != 2 || z.dim(1) != num_classes)
    throw DimensionError("classification read-out needs latent_dim == " +
                         std::to_string(num_classes) + ", got " + shape_string(z.shape()));
  return softmax(z, 1);
}

/// Row argmax, lowest index on ties.
inline std::vector<std::size_t> argmax_rows(const Tensor& t) {
  if (t.rank() != 2) throw DimensionError("argmax_rows needs a rank-2 tensor");
  const std::size_t n = t.dim(0), r = t.dim(1);
  auto v = t.values();
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j < r; ++j)
      if (v[i * r + j] > v[i * r + out[i]]) out[i] = j;
  return out;
}

/// Identity read-out of a one-dimensional latent, shape [batch].
inline Tensor predict_regression(const Tensor& z) {
  if (z.rank() != 2 || z.dim(1) != 1)
    throw DimensionError("regression read-out needs latent_dim == 1, got " + shape_string(z.shape()));
  return sum(z, 1);
}

enum class LossKind { kCrossEntropy, kMse };

inline Tensor cross_entropy(const Tensor& probs, std::span<const std::size_t> labels) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size())
    throw DimensionError("cross entropy: " + shape_string(probs.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  const std::size_t n = probs.dim(0), r = probs.dim(1);
  std::vector<double> onehot(n * r, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= r) throw std::out_of_range("label outside class range");
    onehot[i * r + labels[i]] = 1.0;
  }
  return -sum(Tensor::from({n, r}, std::move(onehot)) * log(probs)) / static_cast<double>(n);
}

inline Tensor mse(const Tensor& pred, std::span<const double> targets) {
  if (pred.rank() != 1 || pred.dim(0) != targets.size())
    throw DimensionError("mse: " + shape_string(pred.shape()) + " vs " +
                         std::to_string(targets.size()) + " targets");
  Tensor t = Tensor::from({targets.size()}, {targets.begin(), targets.end()});
  return mean(square(pred - t));
}

/// CE expects class probabilities and integral class ids; MSE expects a
/// [batch] prediction and real targets.
inline Tensor task_loss(const Tensor& pred, std::span<const double> targets, LossKind kind) {
  if (kind == LossKind::kMse) return mse(pred, targets);
  if (pred.rank() != 2) throw DimensionError("cross entropy expects batch x classes probabilities");
  std::vector<std::size_t> labels(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] != std::floor(targets[i]))
      throw std::invalid_argument("cross entropy targets must be non-negative class ids");
    labels[i] = static_cast<std::size_t>(targets[i]);
  }
  return cross_entropy(pred, labels);
}

struct LossBreakdown {
  double task = 0.0;
  double kl = 0.0;
  double se = 0.0;
  double total = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// total = task + beta * kl - gamma * se. Structural entropy is maximized.
inline LossBreakdown total_loss(double task, double kl, double se, double beta, double gamma) {
  return {task, kl, se, task + beta * kl - gamma * se, beta, gamma};
}

inline Tensor total_loss(const Tensor& task, const Tensor& kl, const Tensor& se, double beta,
                         double gamma) {
  return task + kl * beta - se * gamma;
}

// ---------------------------------------------------------------------------
// Full training objective

enum class LabelSoftening { kSoft, kHard };

struct ObjectiveConfig {
  TaskKind task = TaskKind::kClassification;
  std::size_t num_classes = 2;  // classification: r
  BinSpec bins;                 // regression: intermediate nodes of the tree
  LabelSoftening softening = LabelSoftening::kSoft;
  double temperature = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool use_mu_for_graph = false;
  SeLossOptions se;

  std::size_t latent_dim() const {
    return task == TaskKind::kClassification ? num_classes : std::size_t{1};
  }
};

/// Assignment matrix for a batch: one-hot labels for classification, softened
/// (or nearest-bin) memberships for regression.
inline AssignmentMatrix batch_assignment(std::span<const double> targets,
                                         const ObjectiveConfig& cfg) {
  if (cfg.task == TaskKind::kClassification) {
    std::vector<std::size_t> labels(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) labels[i] = static_cast<std::size_t>(targets[i]);
    return hard_assignment(labels, cfg.num_classes);
  }
  if (cfg.softening == LabelSoftening::kHard)
    return hard_assignment(nearest_bins(targets, cfg.bins), cfg.bins.centers.size());
  return soften(distance_matrix(targets, cfg.bins), cfg.temperature);
}

struct ObjectiveTerms {
  Tensor task, kl, se, total;

  LossBreakdown breakdown(double beta, double gamma) const {
    LossBreakdown b = total_loss(task.item(), kl.item(), se.item(), beta, gamma);
    b.total = total.item();
    return b;
  }
};

namespace detail {

/// A diverged encoder yields NaN here so the caller sees a non-finite loss
/// rather than an input-validation error.
inline Tensor graph_se(const Tensor& z, const AssignmentMatrix& c, const SeLossOptions& opts) {
  const auto finite = [](const Tensor& t) {
    return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(z)) return Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
  Tensor a = sigmoid(matmul(z, transpose(z)));
  if (!finite(a)) return Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
  return se_loss_matrix(AdjacencyMatrix::from_tensor(a), c, opts);
}

}  // namespace detail

/// Task and SE terms are averaged over the provided noise draws (one draw per
/// sample of the expectation). Zero noise evaluates at the posterior mean.
/// A single-row batch has no graph and reports se = 0.
inline ObjectiveTerms compute_objective(const EncoderParams& params, const Tensor& x,
                                        std::span<const double> targets,
                                        std::span<const Tensor> noise, const ObjectiveConfig& cfg) {
  if (noise.empty()) throw std::invalid_argument("at least one noise draw is required");
  if (params.config.latent_dim != cfg.latent_dim())
    throw DimensionError("encoder latent_dim " + std::to_string(params.config.latent_dim) +
                         " does not fit the task read-out (" + std::to_string(cfg.latent_dim()) + ")");
  if (x.dim(0) != targets.size()) throw DimensionError("batch and target counts differ");

  GaussianPosterior post = encode(params, x);
  AssignmentMatrix assignment = batch_assignment(targets, cfg);
  const double inv = 1.0 / static_cast<double>(noise.size());

  Tensor task, se;
  for (const auto& eps : noise) {
    Tensor z = reparameterize(post, eps);
    Tensor t = cfg.task == TaskKind::kClassification
                   ? task_loss(predict_classification(z, cfg.num_classes), targets,
                               LossKind::kCrossEntropy)
                   : task_loss(predict_regression(z), targets, LossKind::kMse);
    task = task.defined() ? task + t : t;
    if (!cfg.use_mu_for_graph && x.dim(0) >= 2) {
      Tensor s = detail::graph_se(z, assignment, cfg.se);
      se = se.defined() ? se + s : s;
    }
  }
  if (noise.size() > 1) {
    task = task * inv;
    if (se.defined()) se = se * inv;
  }
  if (x.dim(0) < 2) se = Tensor::scalar(0.0);  // no graph on a single sample
  else if (cfg.use_mu_for_graph) se = detail::graph_se(post.mu, assignment, cfg.se);

  Tensor kl = kl_to_standard_normal(post);
  return {task, kl, se, total_loss(task, kl, se, cfg.beta, cfg.gamma)};
}

}  // namespace sepc
