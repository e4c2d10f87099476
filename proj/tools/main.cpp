#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "qsvm/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<long> shots;
  std::optional<int> train_size;
  std::optional<std::string> output;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--backend", f.backend, "brute_force | simulated_anneal | analog_ideal | analog_noisy");
  cmd->add_option("--shots", f.shots, "Shots per training run");
  cmd->add_option("--train-size", f.train_size, "Training samples (experiment: the only train size)");
  cmd->add_option("--output", f.output, "Output directory");
}

qsvm::ExperimentConfig load(const std::string& path) {
  try {
    return path.empty() ? qsvm::config_from_json(nlohmann::json::object()) : qsvm::load_config(path);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
}

qsvm::ExperimentConfig resolve(const CommonFlags& f) {
  qsvm::ExperimentConfig cfg = load(f.config);
  if (f.seed) cfg.seed = cfg.split.seed = *f.seed;
  if (f.backend) cfg.backend.kind = qsvm::backend_kind_from_string(*f.backend);
  if (f.shots) {
    if (*f.shots < 1) throw std::invalid_argument("--shots must be at least 1");
    cfg.backend.shots = *f.shots;
  }
  if (f.train_size) {
    if (*f.train_size < 2) throw std::invalid_argument("--train-size must be at least 2");
    cfg.split.train_size = *f.train_size;
    cfg.train_sizes = {*f.train_size};
  }
  if (f.output) cfg.output = *f.output;
  // Re-parse roster against the overridden backend so bad entries fail early.
  for (const auto& name : cfg.roster) qsvm::parse_roster_entry(name, cfg);
  return cfg;
}

void report(const std::vector<fs::path>& written) {
  for (const auto& p : written) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train SVM classifiers through QUBO formulations on a simulated neutral-atom device"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string qubo_file;
  std::optional<std::string> model_file;
  std::size_t top_k = 16;

  auto* formulate = app.add_subcommand("formulate", "Build the QUBO matrix for one split");
  add_common(formulate, flags);

  auto* embed = app.add_subcommand("embed", "Place atoms for a QUBO file");
  add_common(embed, flags);
  embed->add_option("--qubo", qubo_file, "QUBO file (text or JSON)")->required()->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "Formulate, solve with the chosen backend and decode models");
  add_common(train, flags);

  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on its test split");
  add_common(evaluate, flags);
  evaluate->add_option("--model", model_file, "Model JSON (default: <output>/model.json)");

  auto* experiment = app.add_subcommand("experiment", "Run the model roster over all train sizes and repeats");
  add_common(experiment, flags);

  auto* oracle = app.add_subcommand("oracle", "Exhaustive spectrum of a QUBO file");
  add_common(oracle, flags);
  oracle->add_option("--qubo", qubo_file, "QUBO file (text or JSON)")->required()->check(CLI::ExistingFile);
  oracle->add_option("--top-k", top_k, "Number of lowest states to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = resolve(flags);
    if (formulate->parsed()) report(qsvm::cmd_formulate(cfg));
    else if (embed->parsed()) report(qsvm::cmd_embed(qubo_file, cfg));
    else if (train->parsed()) report(qsvm::cmd_train(cfg));
    else if (evaluate->parsed()) report(qsvm::cmd_evaluate(cfg, model_file ? std::optional<fs::path>(*model_file) : std::nullopt));
    else if (experiment->parsed()) {
      report(qsvm::cmd_experiment(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; }));
    } else if (oracle->parsed()) {
      if (top_k < 1) throw std::invalid_argument("--top-k must be at least 1");
      report(qsvm::cmd_oracle(qubo_file, top_k, cfg.output));
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
