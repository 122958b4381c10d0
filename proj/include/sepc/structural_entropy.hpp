#pragma once

// Latent-similarity graphs, three-tier encoding trees, and structural entropy.
//
// Two independent routes are provided:
//   * structural_entropy_definition / intermediate_layer_entropy enumerate
//     point sets explicitly over plain doubles (non-differentiable oracle);
//   * se_loss_matrix evaluates the same quantity in matrix form on Tensors
//     and is differentiable w.r.t. the adjacency (and a soft assignment).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sepc/tensor.hpp"

namespace sepc {

class DegenerateBatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyClassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted graph over a batch. `degrees` and `volume` are value snapshots of
/// the row sums and total weight of `weights`; the tensor carries the graph.
struct AdjacencyMatrix {
  Tensor weights;
  std::vector<double> degrees;
  double volume = 0.0;

  std::size_t size() const { return degrees.size(); }
  double at(std::size_t i, std::size_t k) const { return weights.at(i, k); }

  /// Wraps an arbitrary non-negative square weight tensor.
  static AdjacencyMatrix from_tensor(Tensor a) {
    if (a.rank() != 2 || a.dim(0) != a.dim(1))
      throw DimensionError("adjacency must be square, got " + shape_string(a.shape()));
    const std::size_t n = a.dim(0);
    AdjacencyMatrix g;
    g.degrees.assign(n, 0.0);
    auto v = a.values();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (!(v[i * n + k] >= 0.0) || !std::isfinite(v[i * n + k]))
          throw std::invalid_argument("adjacency weights must be finite and non-negative");
        g.degrees[i] += v[i * n + k];
      }
    for (double d : g.degrees) g.volume += d;
    g.weights = std::move(a);
    return g;
  }
};

/// A = sigmoid(H H^T), diagonal kept. Differentiable w.r.t. `embeddings`.
inline AdjacencyMatrix build_adjacency(const Tensor& embeddings) {
  if (embeddings.rank() != 2)
    throw DimensionError("embeddings must be rank 2, got " + shape_string(embeddings.shape()));
  if (embeddings.dim(0) < 2)
    throw DegenerateBatchError("a similarity graph needs at least 2 samples");
  for (double v : embeddings.values())
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite embedding value");
  return AdjacencyMatrix::from_tensor(sigmoid(matmul(embeddings, transpose(embeddings))));
}

enum class AssignmentMode { kHard, kSoft };

/// n x r leaf-to-class membership.
struct AssignmentMatrix {
  Tensor membership;
  AssignmentMode mode = AssignmentMode::kHard;

  std::size_t rows() const { return membership.dim(0); }
  std::size_t classes() const { return membership.dim(1); }

  /// Validates a row-stochastic matrix (entries in [0,1], rows sum to 1 +- 1e-9).
  static AssignmentMatrix soft(Tensor c) {
    if (c.rank() != 2) throw DimensionError("assignment must be rank 2");
    const std::size_t n = c.dim(0), r = c.dim(1);
    auto v = c.values();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < r; ++j) {
        double x = v[i * r + j];
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("soft assignment entries must lie in [0,1]");
        s += x;
      }
      if (std::fabs(s - 1.0) > 1e-9)
        throw std::invalid_argument("soft assignment row " + std::to_string(i) +
                                    " does not sum to 1");
    }
    return {std::move(c), AssignmentMode::kSoft};
  }
};

/// One-hot rows from class ids in [0, r).
inline AssignmentMatrix hard_assignment(std::span<const std::size_t> labels, std::size_t r) {
  if (r == 0) throw std::invalid_argument("class count must be positive");
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::vector<double> c(labels.size() * r, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= r)
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(r) + ")");
    c[i * r + labels[i]] = 1.0;
  }
  return {Tensor::from({labels.size(), r}, std::move(c)), AssignmentMode::kHard};
}

enum class Tier { kRoot, kIntermediate, kLeaf };

struct TreeNode {
  Tier tier = Tier::kRoot;
  int parent = -1;  // -1 for the root
  std::vector<std::size_t> children;
  std::vector<std::size_t> points;  // T_alpha, sorted
};

/// Root / intermediate / leaf tree. Node 0 is the root, nodes 1..r the
/// intermediate nodes in class order, node r+1+i the leaf holding point i.
class EncodingTree {
 public:
  static EncodingTree from_partition(std::size_t num_points,
                                     const std::vector<std::vector<std::size_t>>& groups) {
    EncodingTree t;
    t.num_points_ = num_points;
    t.num_groups_ = groups.size();
    t.nodes_.resize(1 + groups.size() + num_points);
    auto& root = t.nodes_[0];
    root.tier = Tier::kRoot;
    std::vector<int> owner(num_points, -1);
    for (std::size_t j = 0; j < groups.size(); ++j) {
      auto& node = t.nodes_[1 + j];
      node.tier = Tier::kIntermediate;
      node.parent = 0;
      root.children.push_back(1 + j);
      for (std::size_t p : groups[j]) {
        if (p >= num_points) throw std::out_of_range("partition references point outside the graph");
        if (owner[p] != -1) throw std::invalid_argument("point assigned to two intermediate nodes");
        owner[p] = static_cast<int>(j);
      }
    }
    for (std::size_t p = 0; p < num_points; ++p) {
      if (owner[p] == -1) throw std::invalid_argument("point not covered by any intermediate node");
      const std::size_t j = static_cast<std::size_t>(owner[p]);
      auto& leaf = t.nodes_[t.leaf_id(p)];
      leaf.tier = Tier::kLeaf;
      leaf.parent = static_cast<int>(1 + j);
      leaf.points = {p};
      t.nodes_[1 + j].children.push_back(t.leaf_id(p));
      t.nodes_[1 + j].points.push_back(p);
      root.points.push_back(p);
    }
    return t;
  }

  std::size_t num_points() const { return num_points_; }
  std::size_t num_intermediate() const { return num_groups_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  std::size_t root_id() const { return 0; }
  std::size_t intermediate_id(std::size_t j) const { return 1 + j; }
  std::size_t leaf_id(std::size_t point) const { return 1 + num_groups_ + point; }

  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<std::size_t>& points(std::size_t id) const { return nodes_.at(id).points; }
  std::size_t child_count(std::size_t id) const { return nodes_.at(id).children.size(); }

 private:
  std::size_t num_points_ = 0;
  std::size_t num_groups_ = 0;
  std::vector<TreeNode> nodes_;
};

/// Intermediate node j holds {i : C_ij = 1}. Empty classes stay as empty nodes.
inline EncodingTree tree_from_assignment(const AssignmentMatrix& c) {
  if (c.mode != AssignmentMode::kHard)
    throw std::invalid_argument("tree_from_assignment needs a hard assignment; soft memberships "
                                "form a probabilistic tree");
  const std::size_t n = c.rows(), r = c.classes();
  std::vector<std::vector<std::size_t>> groups(r);
  auto v = c.membership.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (v[i * r + j] == 1.0) groups[j].push_back(i);
  return EncodingTree::from_partition(n, groups);
}

struct StructuralEntropyReport {
  std::vector<double> node_entropy;  // indexed by tree node id; root entry is 0
  double total = 0.0;
};

/// H(G; alpha) = -(g_alpha / vol) log2(V_alpha / V_parent) for every non-root
/// node by explicit enumeration of T_alpha and its complement.
inline StructuralEntropyReport structural_entropy_definition(const AdjacencyMatrix& g,
                                                             const EncodingTree& tree) {
  const std::size_t n = g.size();
  if (tree.num_points() != n)
    throw std::invalid_argument("tree covers " + std::to_string(tree.num_points()) +
                                " leaves but the graph has " + std::to_string(n) + " vertices");
  auto w = g.weights.values();
  std::vector<double> degree(n, 0.0);
  double vol = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) degree[i] += w[i * n + k];
    vol += degree[i];
  }

  auto volume_of = [&](const std::vector<std::size_t>& set) {
    double v = 0.0;
    for (std::size_t i : set) v += degree[i];
    return v;
  };
  auto cut_of = [&](const std::vector<std::size_t>& set) {
    std::vector<char> inside(n, 0);
    for (std::size_t i : set) inside[i] = 1;
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (inside[i])
        for (std::size_t k = 0; k < n; ++k)
          if (!inside[k]) c += w[i * n + k];
    return c;
  };

  StructuralEntropyReport rep;
  rep.node_entropy.assign(tree.num_nodes(), 0.0);
  for (std::size_t id = 1; id < tree.num_nodes(); ++id) {
    const auto& node = tree.node(id);
    if (node.points.empty()) continue;
    const double v_self = volume_of(node.points);
    const double v_parent = volume_of(tree.points(static_cast<std::size_t>(node.parent)));
    if (v_self <= 0.0) continue;
    const double h = -(cut_of(node.points) / vol) * std::log2(v_self / v_parent);
    rep.node_entropy[id] = h;
    rep.total += h;
  }
  return rep;
}

/// Sum of the intermediate-node terms of structural_entropy_definition.
inline double intermediate_layer_entropy(const AdjacencyMatrix& g, const EncodingTree& tree) {
  auto rep = structural_entropy_definition(g, tree);
  double s = 0.0;
  for (std::size_t j = 0; j < tree.num_intermediate(); ++j)
    s += rep.node_entropy[tree.intermediate_id(j)];
  return s;
}

enum class LogBase { kTwo, kNatural };

struct SeLossOptions {
  // kNatural exists only for mutation testing of the oracle checks.
  LogBase log_base = LogBase::kTwo;
  // Throw EmptyClassError instead of letting an empty class contribute 0.
  bool error_on_empty_class = false;
};

/// Per-class pieces of the matrix form, exposed for debugging and dumps.
struct SeLossTerms {
  Tensor cuts;     // ((1 - C)^T A C)_jj, shape [r]
  Tensor volumes;  // (1^T A C)_jj, shape [r]
  Tensor total;    // sum(A)
  Tensor loss;     // scalar
};

inline SeLossTerms se_loss_terms(const AdjacencyMatrix& g, const AssignmentMatrix& c,
                                 const SeLossOptions& opts = {}) {
  const Tensor& a = g.weights;
  const Tensor& cm = c.membership;
  if (cm.rank() != 2 || cm.dim(0) != a.dim(0))
    throw DimensionError("assignment rows " + shape_string(cm.shape()) +
                         " do not match adjacency " + shape_string(a.shape()));
  if (opts.error_on_empty_class) {
    auto v = cm.values();
    const std::size_t n = cm.dim(0), r = cm.dim(1);
    for (std::size_t j = 0; j < r; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += v[i * r + j];
      if (col == 0.0) throw EmptyClassError("class " + std::to_string(j) + " is empty in this batch");
    }
  }
  SeLossTerms t;
  Tensor ac = matmul(a, cm);
  t.cuts = sum((1.0 - cm) * ac, 0);
  t.volumes = sum(ac, 0);
  t.total = sum(a);
  Tensor ratio_log = opts.log_base == LogBase::kTwo ? log2(t.volumes / t.total)
                                                    : log(t.volumes / t.total);
  t.loss = -sum((t.cuts / t.total) * ratio_log);
  return t;
}

/// L_SE = -sum_j ((1-C)^T A C)_jj / sum(A) * log2((1^T A C)_jj / sum(A)).
inline Tensor se_loss_matrix(const AdjacencyMatrix& g, const AssignmentMatrix& c,
                             const SeLossOptions& opts = {}) {
  return se_loss_terms(g, c, opts).loss;
}

}  // namespace sepc
