#pragma once

// Regression labels as soft class memberships, and structural entropy over
// the resulting probabilistic encoding tree.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepc/structural_entropy.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

/// r uniform-width bins over [lo, hi] with midpoint centers.
struct BinSpec {
  std::size_t r = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> centers;
};

inline BinSpec make_bins(double lo, double hi, std::size_t r) {
  if (!(lo < hi)) throw std::invalid_argument("bin range needs lo < hi");
  if (r < 2) throw std::invalid_argument("need at least 2 bins");
  BinSpec b{r, lo, hi, {}};
  const double width = (hi - lo) / static_cast<double>(r);
  for (std::size_t j = 0; j < r; ++j) b.centers.push_back(lo + (static_cast<double>(j) + 0.5) * width);
  return b;
}

/// D_ij = |y_i - P_j|, shape n x r.
inline Tensor distance_matrix(std::span<const double> y, const BinSpec& bins) {
  if (y.empty()) throw std::invalid_argument("no labels");
  const std::size_t n = y.size(), r = bins.centers.size();
  std::vector<double> d(n * r);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) throw std::invalid_argument("non-finite regression label");
    for (std::size_t j = 0; j < r; ++j) d[i * r + j] = std::fabs(y[i] - bins.centers[j]);
  }
  return Tensor::from({n, r}, std::move(d));
}

/// Labels outside [lo, hi] are still placed; callers may warn on a nonzero count.
inline std::size_t count_out_of_range(std::span<const double> y, const BinSpec& bins) {
  std::size_t c = 0;
  for (double v : y) c += (v < bins.lo || v > bins.hi) ? 1 : 0;
  return c;
}

/// Y' = softmax(-D / tau) row-wise. The result carries no gradient.
inline AssignmentMatrix soften(const Tensor& distances, double temperature = 1.0) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
  for (double v : distances.values())
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite distance");
  Tensor y = softmax(-(distances.detach() / temperature), 1).detach();
  return {std::move(y), AssignmentMode::kSoft};
}

/// Index of the nearest bin center per label (lowest index on ties).
inline std::vector<std::size_t> nearest_bins(std::span<const double> y, const BinSpec& bins) {
  std::vector<std::size_t> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < bins.centers.size(); ++j)
      if (std::fabs(y[i] - bins.centers[j]) < std::fabs(y[i] - bins.centers[best])) best = j;
    out[i] = best;
  }
  return out;
}

/// Tree whose leaves attach to every intermediate node with the probabilities
/// in `membership`. One-hot rows reduce it to an ordinary EncodingTree.
class ProbabilisticEncodingTree {
 public:
  explicit ProbabilisticEncodingTree(AssignmentMatrix membership)
      : membership_(std::move(membership)) {
    if (membership_.mode == AssignmentMode::kSoft)
      AssignmentMatrix::soft(membership_.membership);  // validates rows
  }

  static ProbabilisticEncodingTree from_labels(std::span<const double> y, const BinSpec& bins,
                                               double temperature = 1.0) {
    return ProbabilisticEncodingTree(soften(distance_matrix(y, bins), temperature));
  }

  const AssignmentMatrix& membership() const { return membership_; }
  std::size_t num_leaves() const { return membership_.rows(); }
  std::size_t num_intermediate() const { return membership_.classes(); }
  double probability(std::size_t leaf, std::size_t node) const {
    return membership_.membership.at(leaf, node);
  }

  /// The equivalent hard tree when every row is one-hot.
  std::optional<EncodingTree> as_encoding_tree() const {
    const std::size_t n = num_leaves(), r = num_intermediate();
    std::vector<std::vector<std::size_t>> groups(r);
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<std::size_t> owner;
      for (std::size_t j = 0; j < r; ++j) {
        double p = probability(i, j);
        if (p == 1.0) owner = j;
        else if (p != 0.0) return std::nullopt;
      }
      if (!owner) return std::nullopt;
      groups[*owner].push_back(i);
    }
    return EncodingTree::from_partition(n, groups);
  }

 private:
  AssignmentMatrix membership_;
};

namespace detail {
inline void check_rows(const AdjacencyMatrix& g, const AssignmentMatrix& y) {
  if (y.membership.rank() != 2 || y.rows() != g.size())
    throw DimensionError("membership " + shape_string(y.membership.shape()) +
                         " does not match a graph of " + std::to_string(g.size()) + " vertices");
}
}  // namespace detail

/// V'_j = sum_i Y'_ij d_i by direct summation.
inline std::vector<double> soft_volumes(const AdjacencyMatrix& g, const AssignmentMatrix& y) {
  detail::check_rows(g, y);
  const std::size_t n = y.rows(), r = y.classes();
  auto w = g.weights.values();
  auto p = y.membership.values();
  std::vector<double> vol(r, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d += w[i * n + k];
    for (std::size_t j = 0; j < r; ++j) vol[j] += p[i * r + j] * d;
  }
  return vol;
}

/// g'_j = sum_{i,k} A_ik Y'_kj (1 - Y'_ij) by direct double summation.
inline std::vector<double> soft_cuts(const AdjacencyMatrix& g, const AssignmentMatrix& y) {
  detail::check_rows(g, y);
  const std::size_t n = y.rows(), r = y.classes();
  auto w = g.weights.values();
  auto p = y.membership.values();
  std::vector<double> cut(r, 0.0);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) cut[j] += w[i * n + k] * p[k * r + j] * (1.0 - p[i * r + j]);
  return cut;
}

/// sum_j -(g'_j / vol) log2(V'_j / vol) composed from soft_cuts/soft_volumes.
inline double soft_structural_entropy(const AdjacencyMatrix& g, const AssignmentMatrix& y) {
  auto cuts = soft_cuts(g, y);
  auto vols = soft_volumes(g, y);
  double vol = 0.0;
  auto w = g.weights.values();
  for (double x : w) vol += x;
  double h = 0.0;
  for (std::size_t j = 0; j < cuts.size(); ++j)
    h += -(cuts[j] / vol) * std::log2(std::max(vols[j] / vol, kLogEpsilon));
  return h;
}

/// Matrix-form loss with C = Y'. Differentiable w.r.t. the graph only.
inline Tensor soft_se_loss(const AdjacencyMatrix& g, const AssignmentMatrix& y,
                           const SeLossOptions& opts = {}) {
  detail::check_rows(g, y);
  AssignmentMatrix frozen{y.membership.requires_grad() ? y.membership.detach() : y.membership,
                          y.mode};
  return se_loss_matrix(g, frozen, opts);
}

}  // namespace sepc
