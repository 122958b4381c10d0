#pragma once

// Grid x seeds x perturbations experiment runner with mean/std aggregation.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "sepc/data.hpp"
#include "sepc/io.hpp"
#include "sepc/train.hpp"

namespace sepc {

struct Perturbation {
  enum class Kind { kNone, kLabelNoise, kTrainFraction };
  Kind kind = Kind::kNone;
  double level = 0.0;

  std::string name() const {
    switch (kind) {
      case Kind::kNone: return "none";
      case Kind::kLabelNoise: return "label_noise";
      case Kind::kTrainFraction: return "train_fraction";
    }
    return "?";
  }

  /// Perturbation seeds follow the run seed so each seed sees its own draw.
  Dataset apply(const Dataset& ds, std::uint64_t seed) const {
    switch (kind) {
      case Kind::kNone: return ds;
      case Kind::kLabelNoise: return inject_label_noise(ds, level, seed);
      case Kind::kTrainFraction: return subsample_train(ds, level, seed);
    }
    return ds;
  }
};

struct ExperimentSpec {
  TrainConfig base;
  std::vector<double> betas;
  std::vector<double> gammas;
  std::vector<std::uint64_t> seeds;
  std::vector<Perturbation> perturbations{Perturbation{}};
  std::string out_dir;
  std::size_t jobs = 1;

  void validate() const {
    if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
    if (betas.empty() || gammas.empty()) throw std::invalid_argument("sweep grid is empty");
    for (double v : betas)
      if (!(v >= 0.0)) throw std::invalid_argument("beta grid values must be >= 0");
    for (double v : gammas)
      if (!(v >= 0.0)) throw std::invalid_argument("gamma grid values must be >= 0");
    if (perturbations.empty()) throw std::invalid_argument("perturbation list is empty");
  }
};

struct RunRecord {
  double beta = 0.0;
  double gamma = 0.0;
  Perturbation perturbation;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> metrics;
  json report;

  std::string cell_key() const {
    std::ostringstream os;
    os << "beta" << detail::format_double(beta) << "_gamma" << detail::format_double(gamma) << '_'
       << perturbation.name() << detail::format_double(perturbation.level);
    return os.str();
  }
  std::string file_stem() const { return cell_key() + "_seed" + std::to_string(seed); }
};

inline std::map<std::string, double> headline_metrics(const MetricsReport& m) {
  std::map<std::string, double> out{{"test_total_loss", m.losses.total}};
  if (m.task == TaskKind::kClassification) {
    out["macro_f1"] = m.macro_f1.value_or(0.0);
    out["macro_recall"] = m.macro_recall.value_or(0.0);
    out["accuracy"] = m.accuracy.value_or(0.0);
  } else {
    out["pearson"] = m.pearson.value_or(0.0);
    out["spearman"] = m.spearman.value_or(0.0);
  }
  return out;
}

/// Metric values recovered from a run report JSON.
inline std::map<std::string, double> metrics_from_report(const json& report) {
  const auto& m = report.at("metrics");
  std::map<std::string, double> out{{"test_total_loss", m.at("losses").at("total").get<double>()}};
  for (const char* k : {"macro_f1", "macro_recall", "accuracy", "pearson", "spearman"})
    if (m.contains(k) && m.at(k).is_number()) out[k] = m.at(k).get<double>();
  return out;
}

inline RunRecord run_single(const ExperimentSpec& spec, const Dataset& ds, double beta, double gamma,
                            const Perturbation& pert, std::uint64_t seed) {
  RunRecord rec;
  rec.beta = beta;
  rec.gamma = gamma;
  rec.perturbation = pert;
  rec.seed = seed;
  try {
    TrainConfig cfg = spec.base;
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.seed = seed;
    Dataset local = pert.apply(ds, seed);
    auto res = train(cfg, local);
    auto test = evaluate(res.params, local, Split::kTest, cfg);
    rec.report = run_report(test, cfg, res, local);
    rec.report["perturbation"] = {{"kind", pert.name()}, {"level", pert.level}};
    rec.metrics = headline_metrics(test);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Runs the Cartesian product; child failures are recorded, not propagated.
/// Results are ordered by (perturbation, beta, gamma, seed) regardless of jobs.
inline std::vector<RunRecord> run_sweep(const ExperimentSpec& spec, const Dataset& ds) {
  spec.validate();
  struct Task {
    double beta, gamma;
    Perturbation pert;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& p : spec.perturbations)
    for (double b : spec.betas)
      for (double g : spec.gammas)
        for (auto s : spec.seeds) tasks.push_back({b, g, p, s});

  std::vector<RunRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& t = tasks[i];
      out[i] = run_single(spec, ds, t.beta, t.gamma, t.pert, t.seed);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(spec.jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

struct CellStats {
  double beta, gamma;
  Perturbation perturbation;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 when n == 1
  std::size_t n = 0;
  std::size_t failures = 0;
};

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline std::vector<CellStats> aggregate(const std::vector<RunRecord>& runs) {
  using Key = std::tuple<int, double, double, double>;
  auto key_of = [](const RunRecord& r) {
    return Key{static_cast<int>(r.perturbation.kind), r.perturbation.level, r.beta, r.gamma};
  };
  std::map<Key, std::vector<const RunRecord*>> cells;
  std::vector<Key> order;
  for (const auto& r : runs) {
    auto k = key_of(r);
    if (!cells.count(k)) order.push_back(k);
    cells[k].push_back(&r);
  }
  std::vector<CellStats> out;
  for (const auto& k : order) {
    const auto& members = cells[k];
    std::size_t failures = 0;
    std::map<std::string, std::vector<double>> values;
    for (const auto* r : members) {
      if (!r->ok) {
        ++failures;
        continue;
      }
      for (const auto& [name, v] : r->metrics) values[name].push_back(v);
    }
    const auto* first = members.front();
    for (const auto& [name, v] : values)
      out.push_back({first->beta, first->gamma, first->perturbation, name, sample_mean(v), sample_std(v),
                     v.size(), failures});
  }
  return out;
}

/// One row per run per metric. Failed runs get a single "error" row.
inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << "beta,gamma,perturbation,level,seed,metric,value,status\n";
  for (const auto& r : runs) {
    const std::string prefix = detail::format_double(r.beta) + ',' + detail::format_double(r.gamma) + ',' +
                               r.perturbation.name() + ',' + detail::format_double(r.perturbation.level) +
                               ',' + std::to_string(r.seed) + ',';
    if (!r.ok) {
      os << prefix << "error,,failed\n";
      continue;
    }
    for (const auto& [name, v] : r.metrics) os << prefix << name << ',' << detail::format_double(v) << ",ok\n";
  }
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<CellStats>& cells) {
  os << "beta,gamma,perturbation,level,metric,mean,std,n,failures\n";
  for (const auto& c : cells)
    os << detail::format_double(c.beta) << ',' << detail::format_double(c.gamma) << ',' << c.perturbation.name()
       << ',' << detail::format_double(c.perturbation.level) << ',' << c.metric << ','
       << detail::format_double(c.mean) << ',' << detail::format_double(c.std) << ',' << c.n << ','
       << c.failures << '\n';
}

/// Writes runs/<cell>_seed<k>.json, runs.csv and aggregate.csv under out_dir.
inline void write_sweep_outputs(const std::string& out_dir, const std::vector<RunRecord>& runs) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "runs");
  for (const auto& r : runs) {
    json j = r.ok ? r.report : json{{"error", r.error}};
    write_json_file((fs::path(out_dir) / "runs" / (r.file_stem() + ".json")).string(), j);
  }
  std::ofstream runs_csv(fs::path(out_dir) / "runs.csv", std::ios::binary);
  write_runs_csv(runs_csv, runs);
  std::ofstream agg_csv(fs::path(out_dir) / "aggregate.csv", std::ios::binary);
  write_aggregate_csv(agg_csv, aggregate(runs));
  if (!runs_csv || !agg_csv) throw std::runtime_error("failed writing sweep tables under " + out_dir);
}

}  // namespace sepc
