#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <functional>
#include <vector>

#include "qsvm/analog.hpp"
#include "qsvm/baselines.hpp"
#include "qsvm/metrics.hpp"
#include "qsvm/svm_qubo.hpp"

namespace qsvm {

inline constexpr int kDefaultMaxModels = 32;

struct RankedEntry {
  Bitstring bits;
  long frequency = 0;
  SvmModel model;
};

/// Frequency descending, lexicographic on ties.
struct RankedModels {
  std::vector<RankedEntry> entries;
};

RankedModels rank_models(const ShotHistogram& hist, const TrainingSet& train, const EncodingConfig& cfg,
                         int max_models = kDefaultMaxModels);

enum class VoteMode {
  /// Sign of the mean decision value.
  decision_average,
  /// Sign of the mean of the members' +-1 labels.
  hard_label,
};

std::string to_string(VoteMode mode);
VoteMode vote_mode_from_string(const std::string& name);

struct VotingEnsemble {
  std::vector<SvmModel> models;
  VoteMode mode = VoteMode::decision_average;

  std::size_t size() const { return models.size(); }
};

/// The k most frequent models of `ranked`.
VotingEnsemble prefix_ensemble(const RankedModels& ranked, std::size_t k, VoteMode mode = VoteMode::decision_average);

double vote_score(const VotingEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x);
int vote_predict(const VotingEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Validation metric of every prefix k = 1..len(ranked), element k-1.
std::vector<double> prefix_scores(const RankedModels& ranked, const TrainingSet& validation, Metric metric,
                                  VoteMode mode = VoteMode::decision_average);

/// Smallest prefix attaining the best validation metric.
VotingEnsemble optimize_ensemble_size(const RankedModels& ranked, const TrainingSet& validation, Metric metric,
                                      VoteMode mode = VoteMode::decision_average);

struct StackedModel {
  std::vector<BaselineModel> base_models;
  SvmModel meta;
};

/// Hard +-1 predictions of every base model for every row of `samples`.
Eigen::MatrixXd meta_features(const std::vector<BaselineModel>& base_models, const Eigen::MatrixXd& samples);

/// Any QUBO backend, reduced to "give me a histogram for this matrix".
using QuboSolver = std::function<ShotHistogram(const QuboMatrix&)>;

/// Trains the QUBO SVM meta-model on the base models' predicted labels; the
/// most frequent state of the solver's histogram becomes the meta-model.
StackedModel stack_train(std::vector<BaselineModel> base_models, const TrainingSet& train, const QuboSolver& solver,
                         const EncodingConfig& cfg);

int stack_predict(const StackedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

nlohmann::json to_json(const RankedModels& ranked);
RankedModels ranked_models_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VotingEnsemble& ens);
VotingEnsemble voting_ensemble_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StackedModel& model);
StackedModel stacked_model_from_json(const nlohmann::json& j);

}  // namespace qsvm
