#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsvm/backend.hpp"
#include "qsvm/baselines.hpp"
#include "qsvm/data.hpp"
#include "qsvm/ensemble.hpp"
#include "qsvm/metrics.hpp"
#include "qsvm/svm_qubo.hpp"

namespace qsvm {

struct DatasetConfig {
  std::filesystem::path path = "data/breast_cancer.csv";
  std::string label_column = "diagnosis";
  std::string positive_label = "benign";
};

/// Where stacking base models are fitted: the QUBO training samples, or the
/// whole pool (training plus validation samples).
enum class StackData { train, pool };

struct ExperimentConfig {
  DatasetConfig dataset;
  /// split.train_size is used by the single-split commands; split.seed is
  /// always the master seed.
  SplitSpec split;
  std::vector<int> train_sizes{6, 7, 8};
  /// Repeat index used by the single-split commands.
  int repeat = 0;
  EncodingConfig encoding;
  /// Linear kernel scale resolved to 1/d for d input features.
  bool kernel_scale_auto = true;
  BackendConfig backend;
  BaselineParams baselines;
  int max_models = kDefaultMaxModels;
  Metric metric = Metric::f1;
  VoteMode vote_mode = VoteMode::decision_average;
  std::vector<BaselineKind> stack_bases{BaselineKind::gaussian_nb, BaselineKind::random_forest,
                                        BaselineKind::logistic_regression, BaselineKind::knn};
  StackData stack_data = StackData::train;
  /// Linear kernel scale of the stacking meta-model; non-positive selects
  /// 1/(2 m) for m base models. With +-1 meta-features that agree with the
  /// labels, 1/m makes the best one-pair state tie with the empty model.
  double meta_kernel_scale = 0.0;
  std::vector<std::string> roster{"knn", "svm_linear", "qubo_svm", "qubo_svm opt"};
  std::filesystem::path output = "runs/default";
  std::uint64_t seed = 42;
};

/// Unknown keys and out-of-range values raise std::invalid_argument. A
/// relative dataset path that does not exist is retried relative to
/// `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// The encoding actually used for inputs with `features` columns.
EncodingConfig resolved_encoding(const ExperimentConfig& cfg, Eigen::Index features);
EncodingConfig resolved_meta_encoding(const ExperimentConfig& cfg, std::size_t base_models);

struct RosterEntry {
  enum class Family { classical, qubo };
  enum class Strategy { single, vote, stack };

  std::string name;
  Family family = Family::classical;
  BaselineKind classical = BaselineKind::knn;
  BackendKind backend = BackendKind::brute_force;
  long shots = 0;
  Strategy strategy = Strategy::single;
};

/// Accepts classical names ("knn", "Random Forest", "svm_rbf", ...) and QUBO
/// SVM identifiers built from the suffixes i (ideal analog), N (noisy
/// analog), opt (voting ensemble), stack (stacked meta-model) and a shot
/// count, e.g. "i", "N opt 500", "N stack". "qubo_svm" without a backend
/// suffix uses the configured backend; "qubo_svm_bruteforce" and
/// "qubo_svm_anneal" pick a classical solver.
RosterEntry parse_roster_entry(const std::string& name, const ExperimentConfig& cfg);

/// A formulated QUBO for one (train_size, repeat) split.
struct FormulatedProblem {
  PreparedSplit prepared;
  EncodingConfig encoding;
  QuboMatrix q;
  int train_size = 0;
};

Dataset load_dataset(const ExperimentConfig& cfg);
FormulatedProblem formulate(const Dataset& data, const ExperimentConfig& cfg, int train_size, int repeat);
nlohmann::json provenance(const FormulatedProblem& problem, const ExperimentConfig& cfg);

struct CellResult {
  std::string model;
  int train_size = 0;
  int repeat = 0;
  bool ok = false;
  std::string error;
  SplitMetrics test;
  nlohmann::json details = nlohmann::json::object();
};

struct ExperimentResult {
  std::vector<std::string> models;
  std::vector<int> train_sizes;
  std::vector<CellResult> cells;

  /// Aggregate over the successful repeats of one (model, train_size).
  std::optional<MetricsReport> summary(const std::string& model, int train_size) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs every roster entry over every train size and repeat. A failing cell
/// is recorded with its error and the run continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, const ProgressFn& progress = {});

// Command pipelines. Each writes into cfg.output and returns the files written.
std::vector<std::filesystem::path> cmd_formulate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_embed(const std::filesystem::path& qubo_file, const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_evaluate(const ExperimentConfig& cfg,
                                                const std::optional<std::filesystem::path>& model_file);
std::vector<std::filesystem::path> cmd_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});
std::vector<std::filesystem::path> cmd_oracle(const std::filesystem::path& qubo_file, std::size_t top_k,
                                              const std::filesystem::path& output);

void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                              std::vector<std::filesystem::path>* written = nullptr);

}  // namespace qsvm
