#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qsvm/svm_qubo.hpp"

namespace qsvm {

enum class BaselineKind { knn, gaussian_nb, logistic_regression, decision_tree, random_forest, svm_linear, svm_rbf };

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& name);

/// Hyperparameters for every kind; each kind reads only its own fields.
struct BaselineParams {
  int knn_k = 3;
  double nb_variance_floor = 1e-9;
  double lr_learning_rate = 0.1;
  double lr_c = 1.0;
  double lr_tolerance = 1e-6;
  int lr_max_iterations = 10000;
  int tree_max_depth = 4;
  int tree_min_samples_split = 2;
  int forest_trees = 50;
  /// Features tried per split; non-positive selects round(sqrt(d)).
  int forest_max_features = 0;
  double svm_c = 1.0;
  /// Non-positive selects 1 / (d * var(X)), the usual "scale" heuristic.
  double svm_gamma = 0.0;
  double svm_tolerance = 1e-4;
  int svm_max_sweeps = 100000;
};

nlohmann::json to_json(const BaselineParams& p);
BaselineParams baseline_params_from_json(const nlohmann::json& j);

struct KnnState {
  int k = 3;
  Eigen::MatrixXd samples;
  Eigen::VectorXd labels;
};

struct GaussianNbState {
  double log_prior_pos = 0.0, log_prior_neg = 0.0;
  bool has_pos = false, has_neg = false;
  Eigen::VectorXd mean_pos, var_pos, mean_neg, var_neg;
};

struct LogisticState {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;
};

/// Flattened CART tree. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1, right = -1;
  int label = 1;
};

struct TreeState {
  std::vector<TreeNode> nodes;
};

struct ForestState {
  std::vector<TreeState> trees;
};

struct KernelSvmState {
  Kernel kernel;
  Eigen::VectorXd alphas;
  double bias = 0.0;
  Eigen::MatrixXd samples;
  Eigen::VectorXd labels;
  int sweeps = 0;
};

using BaselineState = std::variant<KnnState, GaussianNbState, LogisticState, TreeState, ForestState, KernelSvmState>;

struct BaselineModel {
  BaselineKind kind = BaselineKind::knn;
  BaselineParams params;
  Eigen::Index features = 0;
  BaselineState state;
};

/// Fits a classical classifier. Logistic regression and the kernel SVMs
/// reject single-class data; naive Bayes falls back to its prior.
BaselineModel fit(BaselineKind kind, const BaselineParams& params, const TrainingSet& train, std::uint64_t seed);

/// Real-valued score whose sign is the predicted label.
double decision_score(const BaselineModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Label in {-1, +1}; a zero score maps to +1.
int predict(const BaselineModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

nlohmann::json to_json(const BaselineModel& model);
BaselineModel baseline_from_json(const nlohmann::json& j);

}  // namespace qsvm
