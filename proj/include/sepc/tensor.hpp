#pragma once

// Minimal reverse-mode automatic differentiation over dense double tensors.
//
// A Tensor is a cheap handle to a node in a dynamically recorded graph. Ops
// that touch a requires_grad input record their parents and a backward
// closure; backward() walks the graph in reverse topological order.
//
// Broadcasting is limited to scalar-with-tensor and equal shapes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sepc {

using Shape = std::vector<std::size_t>;

/// Lower clamp for every log/log2 argument.
inline constexpr double kLogEpsilon = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  double* grad_data() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    return grad.data();
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
    for (auto e : shape)
      if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape));
    if (values.size() != shape_numel(shape))
      throw DimensionError("value count " + std::to_string(values.size()) +
                           " does not match shape " + shape_string(shape));
    auto n = std::make_shared<detail::Node>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor full(Shape shape, double v, bool requires_grad = false) {
    auto count = shape_numel(shape);
    return from(std::move(shape), std::vector<double>(count, v), requires_grad);
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), 0.0, requires_grad);
  }

  static Tensor ones(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), 1.0, requires_grad);
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return from({}, {v}, requires_grad);
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node().shape; }
  std::size_t rank() const { return node().shape.size(); }
  std::size_t dim(std::size_t i) const { return node().shape.at(i); }
  std::size_t numel() const { return node().values.size(); }
  bool is_scalar() const { return numel() == 1; }

  std::span<const double> values() const { return node().values; }
  // Direct write access for optimizers and finite-difference probes. Mutating
  // values after a graph was recorded invalidates that graph.
  std::span<double> mutable_values() { return node().values; }

  double item() const {
    if (!is_scalar()) throw DimensionError("item() on non-scalar tensor " + shape_string(shape()));
    return node().values[0];
  }

  double at(std::size_t i) const { return node().values.at(i); }
  double at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("at(i,j) requires a rank-2 tensor");
    return node().values.at(i * dim(1) + j);
  }

  bool requires_grad() const { return node().requires_grad; }
  bool has_grad() const { return node().grad.size() == node().values.size(); }

  // Empty span until a backward pass has reached this tensor.
  std::span<const double> grad() const { return node().grad; }

  void zero_grad() { node().grad.assign(node().values.size(), 0.0); }

  /// Same values, no graph history, no gradient tracking.
  Tensor detach() const { return from(shape(), node().values, false); }

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  // Graph construction hooks used by the op implementations below.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward) {
    Tensor out = from(std::move(shape), std::move(values), false);
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      auto& n = out.node();
      n.requires_grad = true;
      for (auto& in : inputs) n.parents.push_back(in.node_);
      n.backward = std::move(backward);
    }
    return out;
  }

  detail::Node& node() const {
    if (!node_) throw GraphError("use of an undefined tensor");
    return *node_;
  }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

enum class Broadcast { kEqual, kLeftScalar, kRightScalar };

inline Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kEqual;
  if (a.is_scalar()) return Broadcast::kLeftScalar;
  if (b.is_scalar()) return Broadcast::kRightScalar;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

// f(x, y) -> value, dfdx(x, y), dfdy(x, y)
template <class F, class Dx, class Dy>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, F f, Dx dfdx, Dy dfdy) {
  const Broadcast kind = broadcast_kind(a, b, name);
  const Shape shape = kind == Broadcast::kLeftScalar ? b.shape() : a.shape();
  const std::size_t n = shape_numel(shape);
  auto av = a.values();
  auto bv = b.values();
  auto ai = [&](std::size_t i) { return kind == Broadcast::kLeftScalar ? av[0] : av[i]; };
  auto bi = [&](std::size_t i) { return kind == Broadcast::kRightScalar ? bv[0] : bv[i]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(ai(i), bi(i));

  return Tensor::make_result(shape, std::move(out), {a, b}, [kind, n, dfdx, dfdy](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const auto& x = pa.values;
    const auto& y = pb.values;
    const bool ls = kind == Broadcast::kLeftScalar;
    const bool rs = kind == Broadcast::kRightScalar;
    if (pa.requires_grad) {
      double* g = pa.grad_data();
      for (std::size_t i = 0; i < n; ++i) {
        double xi = ls ? x[0] : x[i], yi = rs ? y[0] : y[i];
        g[ls ? 0 : i] += self.grad[i] * dfdx(xi, yi);
      }
    }
    if (pb.requires_grad) {
      double* g = pb.grad_data();
      for (std::size_t i = 0; i < n; ++i) {
        double xi = ls ? x[0] : x[i], yi = rs ? y[0] : y[i];
        g[rs ? 0 : i] += self.grad[i] * dfdy(xi, yi);
      }
    }
  });
}

// f(x) -> value; df(x, f(x)) -> local derivative
template <class F, class Df>
Tensor unary_op(const Tensor& a, F f, Df df) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return Tensor::make_result(a.shape(), std::move(out), {a}, [df](Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    for (std::size_t i = 0; i < self.values.size(); ++i)
      g[i] += self.grad[i] * df(p.values[i], self.values[i]);
  });
}

struct AxisSplit {
  std::size_t outer, len, inner;
  Shape reduced;
};

inline AxisSplit split_axis(const Shape& s, std::size_t axis) {
  if (axis >= s.size())
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_string(s));
  AxisSplit r{1, s[axis], 1, {}};
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis) r.reduced.push_back(s[i]);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

inline Tensor div(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

inline Tensor neg(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

inline Tensor abs(const Tensor& a) {
  return detail::unary_op(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

inline Tensor exp(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::exp(x); },
                          [](double, double y) { return y; });
}

inline Tensor log(const Tensor& a) {
  return detail::unary_op(
      a, [](double x) { return std::log(std::max(x, kLogEpsilon)); },
      [](double x, double) { return x > kLogEpsilon ? 1.0 / x : 0.0; });
}

inline Tensor log2(const Tensor& a) {
  return detail::unary_op(
      a, [](double x) { return std::log2(std::max(x, kLogEpsilon)); },
      [](double x, double) { return x > kLogEpsilon ? 1.0 / (x * std::numbers::ln2) : 0.0; });
}

inline Tensor sigmoid(const Tensor& a) {
  return detail::unary_op(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

// Gradient passes only where lo <= x <= hi.
inline Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return detail::unary_op(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

inline Tensor relu(const Tensor& a) {
  return clamp(a, 0.0, std::numeric_limits<double>::infinity());
}

inline Tensor square(const Tensor& a) { return mul(a, a); }

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
inline Tensor operator+(double a, const Tensor& b) { return add(Tensor::scalar(a), b); }
inline Tensor operator-(const Tensor& a, double b) { return sub(a, Tensor::scalar(b)); }
inline Tensor operator-(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
inline Tensor operator*(double a, const Tensor& b) { return mul(Tensor::scalar(a), b); }
inline Tensor operator/(const Tensor& a, double b) { return div(a, Tensor::scalar(b)); }
inline Tensor operator/(double a, const Tensor& b) { return div(Tensor::scalar(a), b); }

// ---------------------------------------------------------------------------
// Linear algebra

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw DimensionError("matmul requires rank-2 operands, got " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()));
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul inner extents differ: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += aip * bv[p * m + j];
    }
  return Tensor::make_result({n, m}, std::move(out), {a, b}, [n, k, m](detail::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const auto& g = self.grad;
    if (pa.requires_grad) {
      double* ga = pa.grad_data();  // g * b^T
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * pb.values[p * m + j];
          ga[i * k + p] += acc;
        }
    }
    if (pb.requires_grad) {
      double* gb = pb.grad_data();  // a^T * g
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = pa.values[i * k + p];
          for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += aip * g[i * m + j];
        }
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose requires a rank-2 tensor");
  const std::size_t r = a.dim(0), c = a.dim(1);
  auto av = a.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return Tensor::make_result({c, r}, std::move(out), {a}, [r, c](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
  });
}

/// Contiguous slice [start, start + length) along `axis`.
inline Tensor narrow(const Tensor& a, std::size_t axis, std::size_t start, std::size_t length) {
  auto sp = detail::split_axis(a.shape(), axis);
  if (length == 0 || start + length > sp.len)
    throw DimensionError("narrow: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") outside axis of extent " +
                         std::to_string(sp.len));
  Shape shape = a.shape();
  shape[axis] = length;
  auto av = a.values();
  std::vector<double> out(sp.outer * length * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t l = 0; l < length; ++l)
      for (std::size_t in = 0; in < sp.inner; ++in)
        out[(o * length + l) * sp.inner + in] = av[(o * sp.len + start + l) * sp.inner + in];
  return Tensor::make_result(shape, std::move(out), {a}, [sp, start, length](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t l = 0; l < length; ++l)
        for (std::size_t in = 0; in < sp.inner; ++in)
          g[(o * sp.len + start + l) * sp.inner + in] +=
              self.grad[(o * length + l) * sp.inner + in];
  });
}

// ---------------------------------------------------------------------------
// Reductions

inline Tensor sum(const Tensor& a) {
  auto av = a.values();
  double s = 0.0;
  for (double v : av) s += v;
  return Tensor::make_result({}, {s}, {a}, [](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    for (std::size_t i = 0; i < p.values.size(); ++i) g[i] += self.grad[0];
  });
}

inline Tensor sum(const Tensor& a, std::size_t axis) {
  auto sp = detail::split_axis(a.shape(), axis);
  auto av = a.values();
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t l = 0; l < sp.len; ++l)
      for (std::size_t in = 0; in < sp.inner; ++in)
        out[o * sp.inner + in] += av[(o * sp.len + l) * sp.inner + in];
  return Tensor::make_result(sp.reduced, std::move(out), {a}, [sp](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t l = 0; l < sp.len; ++l)
        for (std::size_t in = 0; in < sp.inner; ++in)
          g[(o * sp.len + l) * sp.inner + in] += self.grad[o * sp.inner + in];
  });
}

inline Tensor mean(const Tensor& a) { return sum(a) / static_cast<double>(a.numel()); }

inline Tensor mean(const Tensor& a, std::size_t axis) {
  auto len = detail::split_axis(a.shape(), axis).len;
  return sum(a, axis) / static_cast<double>(len);
}

// Gradient goes to the first maximal element.
inline Tensor max(const Tensor& a) {
  auto av = a.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < av.size(); ++i)
    if (av[i] > av[best]) best = i;
  return Tensor::make_result({}, {av[best]}, {a}, [best](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    p.grad_data()[best] += self.grad[0];
  });
}

inline Tensor max(const Tensor& a, std::size_t axis) {
  auto sp = detail::split_axis(a.shape(), axis);
  auto av = a.values();
  std::vector<double> out(sp.outer * sp.inner);
  std::vector<std::size_t> arg(sp.outer * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      std::size_t best = o * sp.len * sp.inner + in;
      for (std::size_t l = 1; l < sp.len; ++l) {
        std::size_t idx = (o * sp.len + l) * sp.inner + in;
        if (av[idx] > av[best]) best = idx;
      }
      out[o * sp.inner + in] = av[best];
      arg[o * sp.inner + in] = best;
    }
  return Tensor::make_result(sp.reduced, std::move(out), {a},
                             [arg = std::move(arg)](detail::Node& self) {
                               auto& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               double* g = p.grad_data();
                               for (std::size_t i = 0; i < arg.size(); ++i)
                                 g[arg[i]] += self.grad[i];
                             });
}

inline Tensor softmax(const Tensor& a, std::size_t axis) {
  auto sp = detail::split_axis(a.shape(), axis);
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      auto idx = [&](std::size_t l) { return (o * sp.len + l) * sp.inner + in; };
      double m = av[idx(0)];
      for (std::size_t l = 1; l < sp.len; ++l) m = std::max(m, av[idx(l)]);
      double z = 0.0;
      for (std::size_t l = 0; l < sp.len; ++l) z += (out[idx(l)] = std::exp(av[idx(l)] - m));
      for (std::size_t l = 0; l < sp.len; ++l) out[idx(l)] /= z;
    }
  return Tensor::make_result(a.shape(), std::move(out), {a}, [sp](detail::Node& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    double* g = p.grad_data();
    const auto& y = self.values;
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        auto idx = [&](std::size_t l) { return (o * sp.len + l) * sp.inner + in; };
        double dot = 0.0;
        for (std::size_t l = 0; l < sp.len; ++l) dot += self.grad[idx(l)] * y[idx(l)];
        for (std::size_t l = 0; l < sp.len; ++l)
          g[idx(l)] += y[idx(l)] * (self.grad[idx(l)] - dot);
      }
  });
}

// ---------------------------------------------------------------------------
// Backward

/// Populates grad buffers of every requires_grad ancestor of `loss`.
/// Leaf gradients accumulate; call zero_grad() on parameters between steps.
/// A graph can be differentiated once.
inline void backward(const Tensor& loss) {
  if (!loss.is_scalar())
    throw DimensionError("backward requires a scalar loss, got " + shape_string(loss.shape()));
  auto& root = loss.node();
  if (root.consumed) throw GraphError("backward: graph already consumed");
  root.consumed = true;
  if (!root.requires_grad) return;

  // Iterative post-order DFS; `order` ends up topologically sorted.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{&root, 0}};
  seen.insert(&root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* n : order)
    if (n->backward) n->grad.assign(n->values.size(), 0.0);
  root.grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

/// Compares reverse-mode gradients of `f` against central differences with
/// step `h` over every entry of every tensor in `params`. Returns
/// max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
///
/// `f` must rebuild its graph from the current parameter values on each call
/// and be deterministic (freeze any sampling noise outside of it).
inline double finite_difference_check(const std::function<Tensor()>& f,
                                      std::vector<Tensor> params, double h = 1e-5) {
  for (auto& p : params) p.zero_grad();
  Tensor loss = f();
  if (!std::isfinite(loss.item())) throw std::runtime_error("finite_difference_check: non-finite loss");
  backward(loss);

  double worst = 0.0;
  for (auto& p : params) {
    std::vector<double> analytic(p.grad().begin(), p.grad().end());
    if (analytic.empty()) analytic.assign(p.numel(), 0.0);
    auto vals = p.mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double orig = vals[i];
      vals[i] = orig + h;
      const double fp = f().item();
      vals[i] = orig - h;
      const double fm = f().item();
      vals[i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("finite_difference_check: non-finite evaluation");
      const double numeric = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace sepc
