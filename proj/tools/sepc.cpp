// sepc: dataset generation, training, sweeps and self-verification.
//
// Exit codes: 0 success, 1 usage, 2 runtime failure, 3 verification failure.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sepc/sepc.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

std::string default_out_dir() {
  const char* env = std::getenv("SEPC_OUT_DIR");
  return env && *env ? env : "sepc_out";
}

struct TrainFlags {
  sepc::TrainConfig cfg;
  std::string data;
  std::string task;  // optional; must agree with the dataset
  bool hard_labels = false;
  double noise_rate = 0.0;
  double train_fraction = 1.0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  auto& c = f.cfg;
  cmd->add_option("--data", f.data, "dataset CSV written by `sepc gen`")->required()->check(CLI::ExistingFile);
  cmd->add_option("--task", f.task, "classification or regression (checked against the data)")
      ->check(CLI::IsMember({"classification", "regression"}));
  cmd->add_option("--beta", c.beta, "KL weight")->capture_default_str();
  cmd->add_option("--gamma", c.gamma, "structural entropy weight; 0 disables it")->capture_default_str();
  cmd->add_option("--lr", c.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--patience", c.patience, "early stopping patience in epochs")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size)->capture_default_str();
  cmd->add_option("--seed", c.seed)->capture_default_str();
  cmd->add_option("--hidden", c.hidden, "hidden layer widths")->capture_default_str()->expected(0, -1);
  cmd->add_option("--bins", c.bins, "regression: number of label bins")->capture_default_str();
  cmd->add_option("--temperature", c.temperature, "regression: soft label temperature")->capture_default_str();
  cmd->add_flag("--hard-labels", f.hard_labels, "regression: nearest-bin labels with a plain encoding tree");
  cmd->add_flag("--use-mu-for-graph", c.use_mu_for_graph, "build the similarity graph from the posterior mean");
  cmd->add_option("--samples", c.samples_per_input, "posterior samples per input")->capture_default_str();
  cmd->add_flag("--error-on-empty-class", c.error_on_empty_class, "fail on batches with an empty class");
}

sepc::Dataset load_for_training(TrainFlags& f) {
  sepc::Dataset ds = sepc::load_csv(f.data);
  if (!f.task.empty() && sepc::parse_task_kind(f.task) != ds.kind)
    throw std::invalid_argument("--task " + f.task + " does not match dataset task " +
                                std::string(sepc::to_string(ds.kind)));
  f.cfg.adopt_task(ds);
  f.cfg.softening = f.hard_labels ? sepc::LabelSoftening::kHard : sepc::LabelSoftening::kSoft;
  f.cfg.validate();
  return ds;
}

int cmd_gen_blobs(std::size_t classes, std::size_t n, std::size_t dim, double spread, std::uint64_t seed,
                  double noise_rate, const std::string& out) {
  auto ds = sepc::gen_blobs(classes, n, dim, spread, seed);
  if (noise_rate > 0.0) ds = sepc::inject_label_noise(ds, noise_rate, seed);
  sepc::save_csv(ds, out);
  std::cout << "wrote " << ds.size() << " rows to " << out << '\n';
  return kExitOk;
}

int cmd_train(TrainFlags& f, const std::string& out_dir) {
  auto ds = load_for_training(f);
  if (f.noise_rate > 0.0) ds = sepc::inject_label_noise(ds, f.noise_rate, f.cfg.seed);
  if (f.train_fraction < 1.0) ds = sepc::subsample_train(ds, f.train_fraction, f.cfg.seed);
  fs::create_directories(out_dir);
  sepc::TrainResult res;
  try {
    res = sepc::train(f.cfg, ds);
  } catch (const sepc::NonFiniteLossError& e) {
    const auto dump = (fs::path(out_dir) / "nonfinite_dump.json").string();
    sepc::write_json_file(dump, {{"error", e.what()},
                                 {"epoch", e.epoch()},
                                 {"step", e.step()},
                                 {"losses", sepc::to_json(e.breakdown())},
                                 {"config", sepc::to_json(f.cfg)}});
    std::cerr << "error: " << e.what() << "\ndump written to " << dump << '\n';
    return kExitRuntime;
  }
  auto test = sepc::evaluate(res.params, ds, sepc::Split::kTest, f.cfg);
  auto report = sepc::run_report(test, f.cfg, res, ds);
  sepc::write_json_file((fs::path(out_dir) / "report.json").string(), report);
  sepc::write_json_file((fs::path(out_dir) / "model.json").string(), sepc::checkpoint_to_json(res.params));
  std::ofstream hist(fs::path(out_dir) / "history.csv", std::ios::binary);
  sepc::write_history_csv(hist, res.history);
  for (const auto& w : test.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("%s %.6f (best epoch %zu of %zu)\n", report["headline_metric"].get<std::string>().c_str(),
              test.headline(), res.best_epoch, res.history.size());
  return kExitOk;
}

int cmd_sweep(TrainFlags& f, const std::vector<double>& betas, const std::vector<double>& gammas,
              const std::vector<std::uint64_t>& seeds, const std::vector<double>& noise_rates,
              const std::vector<double>& fractions, std::size_t jobs, const std::string& out_dir) {
  auto ds = load_for_training(f);
  sepc::ExperimentSpec spec;
  spec.base = f.cfg;
  spec.betas = betas.empty() ? std::vector<double>{f.cfg.beta} : betas;
  spec.gammas = gammas.empty() ? std::vector<double>{f.cfg.gamma} : gammas;
  spec.seeds = seeds;
  spec.out_dir = out_dir;
  spec.jobs = jobs;
  if (!noise_rates.empty() || !fractions.empty()) {
    spec.perturbations.clear();
    for (double r : noise_rates) spec.perturbations.push_back({sepc::Perturbation::Kind::kLabelNoise, r});
    for (double q : fractions) spec.perturbations.push_back({sepc::Perturbation::Kind::kTrainFraction, q});
  }
  spec.validate();
  auto runs = sepc::run_sweep(spec, ds);
  sepc::write_sweep_outputs(out_dir, runs);
  std::size_t failed = 0;
  for (const auto& r : runs)
    if (!r.ok) {
      ++failed;
      std::cerr << "run " << r.file_stem() << " failed: " << r.error << '\n';
    }
  std::cout << runs.size() << " runs (" << failed << " failed), tables in " << out_dir << '\n';
  return kExitOk;
}

int cmd_verify(std::vector<std::string> only, bool mutate, std::uint64_t seed, const std::string& dump) {
  sepc::verify::Options opts;
  opts.seed = seed;
  opts.mutate_log_base = mutate;
  if (only.empty()) only = sepc::verify::check_names();
  bool all = true;
  sepc::json out = sepc::json::array();
  for (const auto& name : only) {
    auto r = sepc::verify::run_check(name, opts);
    all = all && r.passed;
    std::printf("%-4s %-12s worst=%.3e tol=%.1e n=%zu %.2fs%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.worst, r.tolerance, r.instances, r.seconds, r.detail.empty() ? "" : " ", r.detail.c_str());
    out.push_back({{"name", r.name},
                   {"passed", r.passed},
                   {"worst", r.worst},
                   {"tolerance", r.tolerance},
                   {"instances", r.instances},
                   {"seconds", r.seconds},
                   {"detail", r.detail}});
  }
  if (!dump.empty()) sepc::write_json_file(dump, {{"checks", out}, {"mutate_log_base", mutate}});
  return all ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural-entropy-guided probabilistic coding"};
  app.require_subcommand(1);
  std::string out_dir = default_out_dir();

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV");
  gen->require_subcommand(1);
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 2000, gen_dim = 16, classes = 4;
  double spread = 0.4, blob_noise = 0.0, noise_std = 0.5, lo = 0.0, hi = 5.0;

  auto* blobs = gen->add_subcommand("blobs", "Gaussian blobs, one per class");
  blobs->add_option("--out", gen_out)->required();
  blobs->add_option("--classes", classes)->required()->check(CLI::PositiveNumber);
  blobs->add_option("--n", gen_n)->required()->check(CLI::PositiveNumber);
  blobs->add_option("--dim", gen_dim)->required()->check(CLI::PositiveNumber);
  blobs->add_option("--seed", gen_seed)->required();
  blobs->add_option("--spread", spread, "per-coordinate standard deviation")->capture_default_str();
  blobs->add_option("--noise-rate", blob_noise, "fraction of train labels to flip")->capture_default_str();

  auto* reg = gen->add_subcommand("regression", "smooth nonlinear target with Gaussian noise");
  reg->add_option("--out", gen_out)->required();
  reg->add_option("--n", gen_n)->required()->check(CLI::PositiveNumber);
  reg->add_option("--dim", gen_dim)->required()->check(CLI::PositiveNumber);
  reg->add_option("--seed", gen_seed)->required();
  reg->add_option("--lo", lo)->required();
  reg->add_option("--hi", hi)->required();
  reg->add_option("--noise-std", noise_std)->capture_default_str();

  TrainFlags train_flags;
  auto* tr = app.add_subcommand("train", "train one model and evaluate it on the test split");
  add_train_flags(tr, train_flags);
  tr->add_option("--out-dir", out_dir, "defaults to $SEPC_OUT_DIR or ./sepc_out");
  tr->add_option("--noise-rate", train_flags.noise_rate, "flip this fraction of train labels")
      ->check(CLI::Range(0.0, 1.0));
  tr->add_option("--train-fraction", train_flags.train_fraction, "keep this fraction of the train split")
      ->check(CLI::Range(0.0, 1.0));

  TrainFlags sweep_flags;
  std::vector<double> betas, gammas, noise_rates, fractions;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t jobs = 1;
  auto* sw = app.add_subcommand("sweep", "grid x seeds x perturbations with mean/std aggregation");
  add_train_flags(sw, sweep_flags);
  sw->add_option("--out-dir", out_dir, "defaults to $SEPC_OUT_DIR or ./sepc_out");
  sw->add_option("--betas", betas, "beta grid")->expected(1, -1);
  sw->add_option("--gammas", gammas, "gamma grid")->expected(1, -1);
  sw->add_option("--seeds", seeds)->expected(1, -1)->capture_default_str();
  sw->add_option("--noise-rates", noise_rates, "label noise perturbations")->expected(1, -1);
  sw->add_option("--fractions", fractions, "train fraction perturbations")->expected(1, -1);
  sw->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<std::string> only;
  bool mutate = false;
  std::uint64_t verify_seed = sepc::verify::Options{}.seed;
  std::string dump;
  auto* vf = app.add_subcommand("verify", "run the oracle, invariance, gradient and KL checks");
  vf->add_option("--only", only, "subset of checks")->expected(1, -1)->check(CLI::IsMember(sepc::verify::check_names()));
  vf->add_flag("--mutate-log-base", mutate, "use natural log in the matrix loss; equivalence must fail");
  vf->add_option("--seed", verify_seed)->capture_default_str();
  vf->add_option("--dump", dump, "write check results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*blobs) return cmd_gen_blobs(classes, gen_n, gen_dim, spread, gen_seed, blob_noise, gen_out);
    if (*reg) {
      auto ds = sepc::gen_regression(gen_n, gen_dim, noise_std, lo, hi, gen_seed);
      sepc::save_csv(ds, gen_out);
      std::cout << "wrote " << ds.size() << " rows to " << gen_out << '\n';
      return kExitOk;
    }
    if (*tr) return cmd_train(train_flags, out_dir);
    if (*sw) return cmd_sweep(sweep_flags, betas, gammas, seeds, noise_rates, fractions, jobs, out_dir);
    if (*vf) return cmd_verify(only, mutate, verify_seed, dump);
  } catch (const sepc::DegenerateBatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
