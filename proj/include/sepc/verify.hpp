#pragma once

// Self-checks run by `sepc verify`: matrix vs enumeration equivalence,
// soft/hard reduction, soft summation form, bounds, invariances, full
// objective gradients, and closed-form KL against Monte Carlo.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sepc/prob_coder.hpp"
#include "sepc/soft_partition.hpp"
#include "sepc/structural_entropy.hpp"

namespace sepc::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // the statistic compared against `tolerance`
  double tolerance = 0.0;
  std::size_t instances = 0;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::uint64_t seed = 20240901;
  // Evaluate the matrix form with natural log; the equivalence check must fail.
  bool mutate_log_base = false;
};

struct RandomInstance {
  Tensor embeddings;  // n x d
  std::vector<std::size_t> labels;
  std::size_t r = 0;
};

inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> nd(4, 32), dd(2, 8), rd(2, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  RandomInstance inst;
  const std::size_t n = nd(rng), d = dd(rng);
  inst.r = rd(rng);
  std::vector<double> h(n * d);
  for (double& v : h) v = g(rng);
  inst.embeddings = Tensor::from({n, d}, std::move(h));
  std::uniform_int_distribution<std::size_t> ld(0, inst.r - 1);
  for (std::size_t i = 0; i < n; ++i) inst.labels.push_back(ld(rng));
  return inst;
}

/// Row-stochastic n x r matrix with entries drawn from a Dirichlet-like
/// normalization of exponentials.
inline AssignmentMatrix random_soft(std::size_t n, std::size_t r, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n * r);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < r; ++j) s += (v[i * r + j] = e(rng));
    for (std::size_t j = 0; j < r; ++j) v[i * r + j] /= s;
  }
  return {Tensor::from({n, r}, std::move(v)), AssignmentMode::kSoft};
}

namespace detail {

template <class F>
CheckResult timed(const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult r = body();
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline SeLossOptions loss_options(const Options& o) {
  SeLossOptions s;
  if (o.mutate_log_base) s.log_base = LogBase::kNatural;
  return s;
}

}  // namespace detail

inline CheckResult check_equivalence(const Options& o, std::size_t instances = 200) {
  return detail::timed("equivalence", [&] {
    std::mt19937_64 rng(o.seed);
    CheckResult r;
    r.tolerance = 1e-9;
    r.instances = instances;
    for (std::size_t k = 0; k < instances; ++k) {
      auto inst = random_instance(rng);
      auto g = build_adjacency(inst.embeddings);
      auto c = hard_assignment(inst.labels, inst.r);
      const double matrix = se_loss_matrix(g, c, detail::loss_options(o)).item();
      const double oracle = intermediate_layer_entropy(g, tree_from_assignment(c));
      r.worst = std::max(r.worst, std::fabs(matrix - oracle));
    }
    r.passed = r.worst <= r.tolerance;
    return r;
  });
}

inline CheckResult check_reduction(const Options& o, std::size_t instances = 200) {
  return detail::timed("reduction", [&] {
    std::mt19937_64 rng(o.seed + 1);
    CheckResult r;
    r.tolerance = 1e-12;
    r.instances = instances;
    for (std::size_t k = 0; k < instances; ++k) {
      auto inst = random_instance(rng);
      auto g = build_adjacency(inst.embeddings);
      auto hard = hard_assignment(inst.labels, inst.r);
      AssignmentMatrix one_hot = AssignmentMatrix::soft(hard.membership.detach());
      const double soft = soft_se_loss(g, one_hot, detail::loss_options(o)).item();
      const double matrix = se_loss_matrix(g, hard, detail::loss_options(o)).item();
      r.worst = std::max(r.worst, std::fabs(soft - matrix));
    }
    r.passed = r.worst <= r.tolerance;
    return r;
  });
}

inline CheckResult check_soft_form(const Options& o, std::size_t instances = 200) {
  return detail::timed("soft-form", [&] {
    std::mt19937_64 rng(o.seed + 2);
    CheckResult r;
    r.tolerance = 1e-9;
    r.instances = instances;
    for (std::size_t k = 0; k < instances; ++k) {
      auto inst = random_instance(rng);
      auto g = build_adjacency(inst.embeddings);
      auto y = random_soft(g.size(), inst.r, rng);
      const double matrix = soft_se_loss(g, y, detail::loss_options(o)).item();
      const double summed = soft_structural_entropy(g, y);
      r.worst = std::max(r.worst, std::fabs(matrix - summed));
    }
    r.passed = r.worst <= r.tolerance;
    return r;
  });
}

inline CheckResult check_bounds(const Options& o, std::size_t instances = 1000) {
  return detail::timed("bounds", [&] {
    std::mt19937_64 rng(o.seed + 3);
    CheckResult r;
    r.tolerance = 0.0;
    r.instances = 2 * instances;
    double worst_violation = 0.0;
    for (std::size_t k = 0; k < instances; ++k) {
      auto inst = random_instance(rng);
      auto g = build_adjacency(inst.embeddings);
      const double cap = std::log2(static_cast<double>(inst.r));
      for (const auto& c : {hard_assignment(inst.labels, inst.r), random_soft(g.size(), inst.r, rng)}) {
        const double l = se_loss_matrix(g, c, detail::loss_options(o)).item();
        worst_violation = std::max({worst_violation, -l, l - cap});
      }
    }
    r.worst = std::max(0.0, worst_violation);
    r.passed = worst_violation <= 0.0;
    return r;
  });
}

inline CheckResult check_invariance(const Options& o, std::size_t instances = 200) {
  return detail::timed("invariance", [&] {
    std::mt19937_64 rng(o.seed + 4);
    CheckResult r;
    r.tolerance = 1e-9;
    r.instances = instances;
    for (std::size_t k = 0; k < instances; ++k) {
      auto inst = random_instance(rng);
      auto g = build_adjacency(inst.embeddings);
      auto c = k % 2 ? hard_assignment(inst.labels, inst.r) : random_soft(g.size(), inst.r, rng);
      const double base = se_loss_matrix(g, c, detail::loss_options(o)).item();
      for (double scale : {0.1, 10.0}) {
        auto scaled = AdjacencyMatrix::from_tensor(g.weights.detach() * scale);
        r.worst = std::max(r.worst, std::fabs(se_loss_matrix(scaled, c, detail::loss_options(o)).item() - base));
      }
      // Same row permutation applied to embeddings and assignment.
      const std::size_t n = inst.embeddings.dim(0), d = inst.embeddings.dim(1), cr = c.classes();
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double> h(n * d), cp(n * cr);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q = 0; q < d; ++q) h[i * d + q] = inst.embeddings.at(perm[i], q);
        for (std::size_t j = 0; j < cr; ++j) cp[i * cr + j] = c.membership.at(perm[i], j);
      }
      AssignmentMatrix pc{Tensor::from({n, cr}, std::move(cp)), c.mode};
      auto pg = build_adjacency(Tensor::from({n, d}, std::move(h)));
      r.worst = std::max(r.worst, std::fabs(se_loss_matrix(pg, pc, detail::loss_options(o)).item() - base));
    }
    r.passed = r.worst <= r.tolerance;
    return r;
  });
}

/// Full objective (task + beta KL - gamma SE) gradient against central
/// differences over every encoder parameter, alternating classification and
/// soft-label regression batches of 8 samples with frozen noise.
inline CheckResult check_gradients(const Options& o, std::size_t batches = 10, double h = 1e-5) {
  return detail::timed("grad", [&] {
    std::mt19937_64 rng(o.seed + 5);
    CheckResult r;
    r.tolerance = 1e-4;
    r.instances = batches;
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (std::size_t b = 0; b < batches; ++b) {
      const bool regression = b % 2 == 1;
      const std::size_t n = 8, in = 5, r_cls = 3;
      ObjectiveConfig cfg;
      cfg.task = regression ? TaskKind::kRegression : TaskKind::kClassification;
      cfg.num_classes = r_cls;
      cfg.bins = make_bins(0.0, 5.0, 5);
      cfg.softening = LabelSoftening::kSoft;
      cfg.beta = 0.5;
      cfg.gamma = 1.0;
      cfg.se = detail::loss_options(o);
      EncoderParams params = EncoderParams::init({in, {6}, cfg.latent_dim()}, rng());
      for (auto& layer : params.layers)  // nonzero biases exercise the bias path
        for (double& v : layer.bias.mutable_values()) v = 0.1 * g(rng);
      std::vector<double> xv(n * in), y(n);
      for (double& v : xv) v = g(rng);
      for (std::size_t i = 0; i < n; ++i)
        y[i] = regression ? u(rng) : static_cast<double>(i % r_cls);
      Tensor x = Tensor::from({n, in}, std::move(xv));
      std::vector<Tensor> noise{standard_normal(n, cfg.latent_dim(), rng)};
      auto f = [&] { return compute_objective(params, x, y, noise, cfg).total; };
      r.worst = std::max(r.worst, finite_difference_check(f, params.tensors(), h));
    }
    r.passed = r.worst < r.tolerance;
    return r;
  });
}

/// Closed-form KL vs a Monte Carlo estimate of E_p[log p(z) - log r(z)].
inline CheckResult check_kl(const Options& o, std::size_t posteriors = 10,
                            std::size_t samples = 1'000'000) {
  return detail::timed("kl", [&] {
    std::mt19937_64 rng(o.seed + 6);
    CheckResult r;
    r.tolerance = 1e-2;
    r.instances = posteriors;
    std::uniform_real_distribution<double> mu_d(-1.0, 1.0), lv_d(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t dims = 3;
    for (std::size_t p = 0; p < posteriors; ++p) {
      std::vector<double> mu(dims), lv(dims);
      for (auto& v : mu) v = mu_d(rng);
      for (auto& v : lv) v = lv_d(rng);
      GaussianPosterior post{Tensor::from({1, dims}, mu), Tensor::from({1, dims}, lv)};
      const double closed = kl_to_standard_normal(post).item();
      double acc = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        double log_ratio = 0.0;
        for (std::size_t q = 0; q < dims; ++q) {
          const double eps = g(rng);
          const double z = mu[q] + std::exp(0.5 * lv[q]) * eps;
          // log N(z; mu, s^2) - log N(z; 0, 1); the 2*pi terms cancel
          log_ratio += -0.5 * lv[q] - 0.5 * eps * eps + 0.5 * z * z;
        }
        acc += log_ratio;
      }
      r.worst = std::max(r.worst, std::fabs(closed - acc / static_cast<double>(samples)));
    }
    GaussianPosterior zero{Tensor::zeros({1, dims}), Tensor::zeros({1, dims})};
    const double at_prior = kl_to_standard_normal(zero).item();
    r.passed = r.worst <= r.tolerance && at_prior == 0.0;
    if (at_prior != 0.0) r.detail = "KL(0, 0) = " + std::to_string(at_prior);
    return r;
  });
}

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"equivalence", "reduction", "soft-form", "bounds",
                                              "invariance",  "grad",      "kl"};
  return names;
}

inline CheckResult run_check(const std::string& name, const Options& o) {
  if (name == "equivalence") return check_equivalence(o);
  if (name == "reduction") return check_reduction(o);
  if (name == "soft-form") return check_soft_form(o);
  if (name == "bounds") return check_bounds(o);
  if (name == "invariance") return check_invariance(o);
  if (name == "grad") return check_gradients(o);
  if (name == "kl") return check_kl(o);
  throw std::invalid_argument("unknown check '" + name + "'");
}

}  // namespace sepc::verify
