#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace sepc {

struct ClassCounts {
  std::vector<std::size_t> tp, fp, fn;
};

inline ClassCounts class_counts(std::span<const std::size_t> preds,
                                std::span<const std::size_t> golds, std::size_t r) {
  if (preds.size() != golds.size()) throw std::invalid_argument("prediction/gold length mismatch");
  ClassCounts c{std::vector<std::size_t>(r), std::vector<std::size_t>(r), std::vector<std::size_t>(r)};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= r || golds[i] >= r) throw std::out_of_range("class id outside [0, r)");
    if (preds[i] == golds[i]) {
      ++c.tp[preds[i]];
    } else {
      ++c.fp[preds[i]];
      ++c.fn[golds[i]];
    }
  }
  return c;
}

/// F1 per class; a class absent from both predictions and golds scores 0.
inline std::vector<double> per_class_f1(std::span<const std::size_t> preds,
                                        std::span<const std::size_t> golds, std::size_t r) {
  auto c = class_counts(preds, golds, r);
  std::vector<double> f1(r, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    const double denom = 2.0 * c.tp[j] + c.fp[j] + c.fn[j];
    f1[j] = denom > 0 ? 2.0 * c.tp[j] / denom : 0.0;
  }
  return f1;
}

inline double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                       std::size_t r) {
  auto f1 = per_class_f1(preds, golds, r);
  return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(r);
}

inline double macro_recall(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                           std::size_t r) {
  auto c = class_counts(preds, golds, r);
  double s = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    const double support = static_cast<double>(c.tp[j] + c.fn[j]);
    s += support > 0 ? c.tp[j] / support : 0.0;
  }
  return s / static_cast<double>(r);
}

inline double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> golds) {
  if (preds.size() != golds.size()) throw std::invalid_argument("prediction/gold length mismatch");
  if (preds.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == golds[i];
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

inline bool is_constant(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

/// Product-moment correlation. Returns 0 when either side is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
  if (x.size() < 2) throw std::invalid_argument("correlation needs at least 2 points");
  if (is_constant(x) || is_constant(y)) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation inputs differ in length");
  if (x.size() < 2) throw std::invalid_argument("correlation needs at least 2 points");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace sepc
