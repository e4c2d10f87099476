#include "qsvm/ensemble.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsvm {

RankedModels rank_models(const ShotHistogram& hist, const TrainingSet& train, const EncodingConfig& cfg,
                         int max_models) {
  if (max_models < 1) throw std::invalid_argument("rank_models: max_models must be at least 1");
  const auto expected = static_cast<std::size_t>(train.size() * cfg.bits_per_alpha);
  std::vector<std::pair<Bitstring, long>> states(hist.counts.begin(), hist.counts.end());
  for (const auto& [bits, count] : states) {
    if (bits.size() != expected) {
      throw std::invalid_argument("rank_models: histogram bitstring of length " + std::to_string(bits.size()) +
                                  " does not match " + std::to_string(expected) + " encoded variables");
    }
  }
  // The map is already in lexicographic order, so a stable sort on the
  // count keeps lexicographic tie order.
  std::stable_sort(states.begin(), states.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  RankedModels ranked;
  for (const auto& [bits, count] : states) {
    if (static_cast<int>(ranked.entries.size()) == max_models) break;
    ranked.entries.push_back({bits, count, model_from_state(bits, train, cfg)});
  }
  return ranked;
}

std::string to_string(VoteMode mode) {
  return mode == VoteMode::decision_average ? "decision_average" : "hard_label";
}

VoteMode vote_mode_from_string(const std::string& name) {
  if (name == "decision_average") return VoteMode::decision_average;
  if (name == "hard_label") return VoteMode::hard_label;
  throw std::invalid_argument("unknown vote mode '" + name + "' (expected decision_average or hard_label)");
}

VotingEnsemble prefix_ensemble(const RankedModels& ranked, std::size_t k, VoteMode mode) {
  if (k < 1 || k > ranked.entries.size()) throw std::invalid_argument("prefix_ensemble: k out of range");
  VotingEnsemble ens;
  ens.mode = mode;
  for (std::size_t i = 0; i < k; ++i) ens.models.push_back(ranked.entries[i].model);
  return ens;
}

double vote_score(const VotingEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (ens.models.empty()) throw std::invalid_argument("vote_predict: empty ensemble");
  double sum = 0.0;
  for (const auto& m : ens.models) {
    sum += ens.mode == VoteMode::decision_average ? decision_value(m, x) : static_cast<double>(predict(m, x));
  }
  return sum / static_cast<double>(ens.models.size());
}

int vote_predict(const VotingEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return sign_label(vote_score(ens, x));
}

std::vector<double> prefix_scores(const RankedModels& ranked, const TrainingSet& validation, Metric metric,
                                  VoteMode mode) {
  if (ranked.entries.empty()) throw std::invalid_argument("optimize_ensemble_size: no ranked models");
  if (validation.size() < 1) throw std::invalid_argument("optimize_ensemble_size: empty validation set");
  // Running sums over members make every prefix O(1) per point.
  const auto n = validation.size();
  Eigen::VectorXd running = Eigen::VectorXd::Zero(n);
  std::vector<double> scores;
  for (std::size_t k = 0; k < ranked.entries.size(); ++k) {
    const auto& m = ranked.entries[k].model;
    std::vector<int> pred(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = validation.samples.row(i).transpose();
      running[i] += mode == VoteMode::decision_average ? decision_value(m, x) : static_cast<double>(predict(m, x));
      pred[i] = sign_label(running[i] / static_cast<double>(k + 1));
    }
    scores.push_back(value(metrics(confusion(validation.labels, pred)), metric));
  }
  return scores;
}

VotingEnsemble optimize_ensemble_size(const RankedModels& ranked, const TrainingSet& validation, Metric metric,
                                      VoteMode mode) {
  const auto scores = prefix_scores(ranked, validation, metric, mode);
  const auto best = std::max_element(scores.begin(), scores.end());  // first maximum = smallest k
  return prefix_ensemble(ranked, static_cast<std::size_t>(best - scores.begin()) + 1, mode);
}

Eigen::MatrixXd meta_features(const std::vector<BaselineModel>& base_models, const Eigen::MatrixXd& samples) {
  Eigen::MatrixXd out(samples.rows(), static_cast<Eigen::Index>(base_models.size()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Eigen::VectorXd x = samples.row(i).transpose();
    for (std::size_t b = 0; b < base_models.size(); ++b) out(i, static_cast<Eigen::Index>(b)) = predict(base_models[b], x);
  }
  return out;
}

StackedModel stack_train(std::vector<BaselineModel> base_models, const TrainingSet& train, const QuboSolver& solver,
                         const EncodingConfig& cfg) {
  if (base_models.size() < 2) throw std::invalid_argument("stack_train: need at least two base models");
  TrainingSet meta_train{meta_features(base_models, train.samples), train.labels};
  const auto q = build_qubo(meta_train, cfg);
  const auto hist = solver(q);
  StackedModel model;
  model.meta = model_from_state(most_probable_state(hist), meta_train, cfg);
  model.base_models = std::move(base_models);
  return model;
}

int stack_predict(const StackedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd features(static_cast<Eigen::Index>(model.base_models.size()));
  for (std::size_t b = 0; b < model.base_models.size(); ++b) features[b] = predict(model.base_models[b], x);
  return predict(model.meta, features);
}

nlohmann::json to_json(const RankedModels& ranked) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : ranked.entries) {
    entries.push_back({{"bitstring", to_string(e.bits)}, {"frequency", e.frequency}, {"model", to_json(e.model)}});
  }
  return {{"entries", entries}};
}

RankedModels ranked_models_from_json(const nlohmann::json& j) {
  RankedModels ranked;
  for (const auto& e : j.at("entries")) {
    ranked.entries.push_back({bitstring_from_string(e.at("bitstring").get<std::string>()), e.at("frequency").get<long>(),
                              svm_model_from_json(e.at("model"))});
  }
  return ranked;
}

nlohmann::json to_json(const VotingEnsemble& ens) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : ens.models) models.push_back(to_json(m));
  return {{"mode", to_string(ens.mode)}, {"size", ens.models.size()}, {"models", models}};
}

VotingEnsemble voting_ensemble_from_json(const nlohmann::json& j) {
  VotingEnsemble ens;
  ens.mode = vote_mode_from_string(j.value("mode", std::string("decision_average")));
  for (const auto& m : j.at("models")) ens.models.push_back(svm_model_from_json(m));
  return ens;
}

nlohmann::json to_json(const StackedModel& model) {
  nlohmann::json bases = nlohmann::json::array();
  for (const auto& b : model.base_models) bases.push_back(to_json(b));
  return {{"base_models", bases}, {"meta", to_json(model.meta)}};
}

StackedModel stacked_model_from_json(const nlohmann::json& j) {
  StackedModel m;
  for (const auto& b : j.at("base_models")) m.base_models.push_back(baseline_from_json(b));
  m.meta = svm_model_from_json(j.at("meta"));
  return m;
}

}  // namespace qsvm
