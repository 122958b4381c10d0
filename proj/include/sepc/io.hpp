#pragma once

// JSON and CSV artifacts: metric reports, training history, model checkpoints,
// and structural-entropy debug records.

#include <cstddef>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sepc/data.hpp"
#include "sepc/prob_coder.hpp"
#include "sepc/structural_entropy.hpp"
#include "sepc/train.hpp"

namespace sepc {

using json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kCheckpointSchemaVersion = 1;

inline json to_json(const LossBreakdown& b) {
  return {{"task", b.task}, {"kl", b.kl}, {"se", b.se}, {"total", b.total},
          {"beta", b.beta}, {"gamma", b.gamma}};
}

inline json to_json(const TrainConfig& c) {
  json j = {{"beta", c.beta},
            {"gamma", c.gamma},
            {"lr", c.lr},
            {"epochs", c.epochs},
            {"patience", c.patience},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"task", std::string(to_string(c.task))},
            {"use_mu_for_graph", c.use_mu_for_graph},
            {"samples_per_input", c.samples_per_input},
            {"hidden", c.hidden},
            {"warmup_fraction", c.warmup_fraction}};
  if (c.task == TaskKind::kClassification) {
    j["num_classes"] = c.num_classes;
  } else {
    j["bins"] = c.bins;
    j["lo"] = c.lo;
    j["hi"] = c.hi;
    j["soft_labels"] = c.softening == LabelSoftening::kSoft;
    j["temperature"] = c.temperature;
  }
  return j;
}

inline json to_json(const MetricsReport& r) {
  json j = {{"task", std::string(to_string(r.task))},
            {"split", r.split},
            {"count", r.count},
            {"seed", r.seed},
            {"losses", to_json(r.losses)},
            {"warnings", r.warnings}};
  if (r.task == TaskKind::kClassification) {
    j["per_class_f1"] = r.per_class_f1;
    j["macro_f1"] = r.macro_f1.value_or(0.0);
    j["macro_recall"] = r.macro_recall.value_or(0.0);
    j["accuracy"] = r.accuracy.value_or(0.0);
  } else {
    j["pearson"] = r.pearson ? json(*r.pearson) : json(nullptr);
    j["spearman"] = r.spearman ? json(*r.spearman) : json(nullptr);
  }
  return j;
}

/// Top-level run report: test metrics, config echo, and training summary.
inline json run_report(const MetricsReport& test, const TrainConfig& cfg, const TrainResult& res,
                       const Dataset& ds) {
  return {{"schema_version", kReportSchemaVersion},
          {"dataset", ds.provenance()},
          {"config", to_json(cfg)},
          {"metrics", to_json(test)},
          {"headline", test.headline()},
          {"headline_metric", cfg.task == TaskKind::kClassification ? "macro_f1" : "spearman"},
          {"best_epoch", res.best_epoch},
          {"best_dev_metric", res.best_dev_metric},
          {"epochs_run", res.history.size()},
          {"steps", res.steps}};
}

inline void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,task,kl,se,total,dev_metric\n";
  for (const auto& r : history)
    os << r.epoch << ',' << detail::format_double(r.task) << ',' << detail::format_double(r.kl) << ','
       << detail::format_double(r.se) << ',' << detail::format_double(r.total) << ','
       << detail::format_double(r.dev_metric) << '\n';
}

inline json checkpoint_to_json(const EncoderParams& p) {
  json layers = json::array();
  for (const auto& l : p.layers)
    layers.push_back({{"weight_shape", l.weight.shape()},
                      {"weight", std::vector<double>(l.weight.values().begin(), l.weight.values().end())},
                      {"bias_shape", l.bias.shape()},
                      {"bias", std::vector<double>(l.bias.values().begin(), l.bias.values().end())}});
  return {{"schema_version", kCheckpointSchemaVersion},
          {"input_dim", p.config.input_dim},
          {"hidden", p.config.hidden},
          {"latent_dim", p.config.latent_dim},
          {"seed", p.seed},
          {"layers", layers}};
}

inline EncoderParams checkpoint_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion)
    throw std::runtime_error("unsupported checkpoint schema version");
  EncoderConfig cfg{j.at("input_dim").get<std::size_t>(), j.at("hidden").get<std::vector<std::size_t>>(),
                    j.at("latent_dim").get<std::size_t>()};
  EncoderParams p = EncoderParams::zeros(cfg);
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto& layers = j.at("layers");
  if (layers.size() != p.layers.size()) throw std::runtime_error("checkpoint layer count mismatch");
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto load = [&](Tensor& t, const char* shape_key, const char* value_key) {
      auto shape = layers[l].at(shape_key).get<Shape>();
      auto values = layers[l].at(value_key).get<std::vector<double>>();
      if (shape != t.shape() || values.size() != t.numel())
        throw std::runtime_error("checkpoint tensor shape mismatch in layer " + std::to_string(l));
      std::copy(values.begin(), values.end(), t.mutable_values().begin());
    };
    load(p.layers[l].weight, "weight_shape", "weight");
    load(p.layers[l].bias, "bias_shape", "bias");
  }
  return p;
}

/// A, C, per-class cut g and volume V, and L_SE together with the
/// enumeration-based value when C is hard.
inline json se_debug_record(const AdjacencyMatrix& g, const AssignmentMatrix& c,
                            const SeLossOptions& opts = {}) {
  auto terms = se_loss_terms(g, c, opts);
  auto vec = [](const Tensor& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
  json j = {{"n", g.size()},
            {"r", c.classes()},
            {"mode", c.mode == AssignmentMode::kHard ? "hard" : "soft"},
            {"A", vec(g.weights)},
            {"C", vec(c.membership)},
            {"degrees", g.degrees},
            {"volume", g.volume},
            {"cuts", vec(terms.cuts)},
            {"class_volumes", vec(terms.volumes)},
            {"se_loss", terms.loss.item()}};
  if (c.mode == AssignmentMode::kHard)
    j["se_definition"] = intermediate_layer_entropy(g, tree_from_assignment(c));
  return j;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(is);
}

}  // namespace sepc
