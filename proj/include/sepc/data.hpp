#pragma once

// Synthetic datasets, experimental perturbations, and CSV persistence.
//
// CSV layout:
//   # generator=<name>;seed=<seed>;params=<key>:<value>,...
//   split,y,x0,...,x{d-1}
//   train,1,0.25,...
// Numbers are written with 17 significant digits, so load(save(ds)) is exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sepc/task.hpp"
#include "sepc/tensor.hpp"

namespace sepc {

enum class Split : std::uint8_t { kTrain, kDev, kTest };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Dataset {
  TaskKind kind = TaskKind::kClassification;
  std::size_t dim = 0;
  std::size_t num_classes = 0;  // classification only
  double lo = 0.0, hi = 0.0;    // regression label range
  std::vector<double> features;  // size() x dim, row-major
  std::vector<double> labels;
  std::vector<Split> splits;
  std::string generator;
  std::uint64_t seed = 0;
  std::string params;  // "key:value,..." provenance

  std::size_t size() const { return labels.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
      if (splits[i] == s) out.push_back(i);
    return out;
  }

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s));
  }

  Tensor feature_tensor(std::span<const std::size_t> idx) const {
    std::vector<double> v;
    v.reserve(idx.size() * dim);
    for (std::size_t i : idx) {
      auto r = row(i);
      v.insert(v.end(), r.begin(), r.end());
    }
    return Tensor::from({idx.size(), dim}, std::move(v));
  }

  std::vector<double> label_values(std::span<const std::size_t> idx) const {
    std::vector<double> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back(labels[i]);
    return v;
  }

  std::vector<std::size_t> class_labels(std::span<const std::size_t> idx) const {
    std::vector<std::size_t> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back(static_cast<std::size_t>(labels[i]));
    return v;
  }

  std::string provenance() const {
    return "generator=" + generator + ";seed=" + std::to_string(seed) + ";params=" + params;
  }
};

struct SplitFractions {
  double train = 0.7;
  double dev = 0.15;  // test receives the remainder
};

namespace detail {

inline void assign_splits(Dataset& ds, const SplitFractions& f, std::mt19937_64& rng) {
  const std::size_t n = ds.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(n)));
  const auto n_dev = static_cast<std::size_t>(std::floor(f.dev * static_cast<double>(n)));
  ds.splits.assign(n, Split::kTest);
  for (std::size_t k = 0; k < n; ++k)
    ds.splits[perm[k]] = k < n_train ? Split::kTrain : (k < n_train + n_dev ? Split::kDev : Split::kTest);
}

inline std::vector<double> unit_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = nd(rng);
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Isotropic Gaussian classes. Class means are orthonormal directions scaled
/// to pairwise distance 1 when r <= d (random unit directions otherwise);
/// samples are mean + spread * N(0, I). Class sizes differ by at most one.
inline Dataset gen_blobs(std::size_t r, std::size_t n, std::size_t d, double spread,
                         std::uint64_t seed, SplitFractions fractions = {}) {
  if (r < 2) throw std::invalid_argument("blobs need at least 2 classes");
  if (n < r) throw std::invalid_argument("blobs need n >= classes");
  if (d == 0) throw std::invalid_argument("feature dimension must be positive");
  if (!(spread >= 0.0)) throw std::invalid_argument("spread must be non-negative");
  std::mt19937_64 rng(seed);

  std::vector<std::vector<double>> means;
  for (std::size_t j = 0; j < r; ++j) {
    auto v = detail::unit_vector(d, rng);
    if (r <= d) {
      for (const auto& m : means) {  // Gram-Schmidt against earlier (unit) means
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += v[k] * m[k];
        for (std::size_t k = 0; k < d; ++k) v[k] -= dot * m[k];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    means.push_back(std::move(v));
  }
  const double scale = std::sqrt(0.5);

  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % r;
  std::shuffle(labels.begin(), labels.end(), rng);

  Dataset ds;
  ds.kind = TaskKind::kClassification;
  ds.dim = d;
  ds.num_classes = r;
  ds.features.resize(n * d);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels.push_back(static_cast<double>(labels[i]));
    for (std::size_t k = 0; k < d; ++k)
      ds.features[i * d + k] = scale * means[labels[i]][k] + spread * nd(rng);
  }
  detail::assign_splits(ds, fractions, rng);
  ds.generator = "blobs";
  ds.seed = seed;
  ds.params = "task:classification,classes:" + std::to_string(r) + ",n:" + std::to_string(n) +
              ",dim:" + std::to_string(d) + ",spread:" + detail::format_double(spread);
  return ds;
}

/// x ~ N(0, I_d); f(x) = sin(u.x) + 0.5 sin(2 v.x) for random unit u, v,
/// mapped affinely from [-1.5, 1.5] onto [lo, hi]; then y = clamp(f + noise).
inline Dataset gen_regression(std::size_t n, std::size_t d, double noise_std, double lo, double hi,
                              std::uint64_t seed, SplitFractions fractions = {}) {
  if (!(lo < hi)) throw std::invalid_argument("regression range needs lo < hi");
  if (n < 2) throw std::invalid_argument("regression needs at least 2 samples");
  if (d == 0) throw std::invalid_argument("feature dimension must be positive");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be non-negative");
  std::mt19937_64 rng(seed);
  const auto u = detail::unit_vector(d, rng);
  const auto v = detail::unit_vector(d, rng);

  Dataset ds;
  ds.kind = TaskKind::kRegression;
  ds.dim = d;
  ds.lo = lo;
  ds.hi = hi;
  ds.features.resize(n * d);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double pu = 0.0, pv = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double x = nd(rng);
      ds.features[i * d + k] = x;
      pu += u[k] * x;
      pv += v[k] * x;
    }
    const double f = std::sin(pu) + 0.5 * std::sin(2.0 * pv);
    const double clean = lo + (hi - lo) * (f + 1.5) / 3.0;
    const double noise = noise_std > 0.0 ? noise_std * nd(rng) : 0.0;
    ds.labels.push_back(std::clamp(clean + noise, lo, hi));
  }
  detail::assign_splits(ds, fractions, rng);
  ds.generator = "regression";
  ds.seed = seed;
  ds.params = "task:regression,n:" + std::to_string(n) + ",dim:" + std::to_string(d) +
              ",noise_std:" + detail::format_double(noise_std) + ",lo:" + detail::format_double(lo) +
              ",hi:" + detail::format_double(hi);
  return ds;
}

/// Reassigns exactly floor(rate * n_train) training labels uniformly over all
/// classes; the draw may return the original class. Dev/test are untouched.
inline Dataset inject_label_noise(const Dataset& ds, double rate, std::uint64_t seed) {
  if (ds.kind != TaskKind::kClassification)
    throw std::invalid_argument("label noise applies to classification datasets only");
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise rate must lie in [0,1]");
  Dataset out = ds;
  auto train = ds.indices(Split::kTrain);
  const auto flips = static_cast<std::size_t>(std::floor(rate * static_cast<double>(train.size())));
  std::mt19937_64 rng(seed);
  std::shuffle(train.begin(), train.end(), rng);
  std::uniform_int_distribution<std::size_t> cls(0, ds.num_classes - 1);
  for (std::size_t k = 0; k < flips; ++k) out.labels[train[k]] = static_cast<double>(cls(rng));
  out.params += ",label_noise:" + detail::format_double(rate) + ",noise_seed:" + std::to_string(seed);
  return out;
}

/// Keeps floor(fraction * n_train) uniformly chosen training rows (original
/// order preserved) and every dev/test row.
inline Dataset subsample_train(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must lie in (0,1]");
  auto train = ds.indices(Split::kTrain);
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size())));
  if (keep == 0) throw std::invalid_argument("subsampling leaves no training rows");
  std::mt19937_64 rng(seed);
  std::shuffle(train.begin(), train.end(), rng);
  std::vector<char> retained(ds.size(), 1);
  for (std::size_t k = keep; k < train.size(); ++k) retained[train[k]] = 0;

  Dataset out = ds;
  out.features.clear();
  out.labels.clear();
  out.splits.clear();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!retained[i]) continue;
    auto r = ds.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(ds.labels[i]);
    out.splits.push_back(ds.splits[i]);
  }
  out.params += ",train_fraction:" + detail::format_double(fraction) +
                ",subsample_seed:" + std::to_string(seed);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv(std::ostream& os, const Dataset& ds) {
  os << "# " << ds.provenance() << '\n';
  os << "split,y";
  for (std::size_t k = 0; k < ds.dim; ++k) os << ",x" << k;
  os << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << to_string(ds.splits[i]) << ',' << detail::format_double(ds.labels[i]);
    for (double x : ds.row(i)) os << ',' << detail::format_double(x);
    os << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(os, ds);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view cell, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError(line, "non-numeric cell '" + std::string(cell) + "'");
  return v;
}

}  // namespace detail

/// Task kind and label range come from the provenance line when present,
/// otherwise integral non-negative labels are read as classification.
inline Dataset read_csv(std::istream& is) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::map<std::string, std::string, std::less<>> meta;

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = std::string_view(line).substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      for (auto kv : detail::split_fields(body, ';')) {
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        std::string key(kv.substr(0, eq));
        std::string value(kv.substr(eq + 1));
        if (key == "generator") ds.generator = value;
        else if (key == "seed") ds.seed = std::stoull(value);
        else if (key == "params") {
          ds.params = value;
          for (auto p : detail::split_fields(value, ',')) {
            auto c = p.find(':');
            if (c != std::string_view::npos) meta[std::string(p.substr(0, c))] = std::string(p.substr(c + 1));
          }
        }
      }
      continue;
    }
    auto fields = detail::split_fields(line, ',');
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "split" || fields[1] != "y")
        throw ParseError(lineno, "expected header 'split,y,x0,...'");
      for (std::size_t k = 2; k < fields.size(); ++k)
        if (fields[k] != "x" + std::to_string(k - 2))
          throw ParseError(lineno, "unexpected feature column '" + std::string(fields[k]) + "'");
      ds.dim = fields.size() - 2;
      have_header = true;
      continue;
    }
    if (fields.size() != ds.dim + 2)
      throw ParseError(lineno, "expected " + std::to_string(ds.dim + 2) + " columns, found " +
                                   std::to_string(fields.size()));
    try {
      ds.splits.push_back(parse_split(fields[0]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
    ds.labels.push_back(detail::parse_double(fields[1], lineno));
    for (std::size_t k = 0; k < ds.dim; ++k) ds.features.push_back(detail::parse_double(fields[k + 2], lineno));
  }
  if (!have_header) throw ParseError(lineno, "empty dataset file");
  if (ds.labels.empty()) throw ParseError(lineno, "dataset file has no rows");

  auto task = meta.find("task");
  bool integral = std::all_of(ds.labels.begin(), ds.labels.end(),
                              [](double y) { return y >= 0 && y == std::floor(y); });
  ds.kind = task != meta.end() ? parse_task_kind(task->second)
                               : (integral ? TaskKind::kClassification : TaskKind::kRegression);
  if (ds.kind == TaskKind::kClassification) {
    if (!integral) throw ParseError(lineno, "classification labels must be non-negative integers");
    auto cls = meta.find("classes");
    const auto max_label = static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end()));
    ds.num_classes = cls != meta.end() ? std::stoul(cls->second) : max_label + 1;
    if (max_label >= ds.num_classes) throw ParseError(lineno, "label exceeds declared class count");
  } else {
    auto lo = meta.find("lo"), hi = meta.find("hi");
    auto [mn, mx] = std::minmax_element(ds.labels.begin(), ds.labels.end());
    ds.lo = lo != meta.end() ? std::stod(lo->second) : *mn;
    ds.hi = hi != meta.end() ? std::stod(hi->second) : *mx;
  }
  return ds;
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(is);
}

}  // namespace sepc
