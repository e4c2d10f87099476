#include "qsvm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qsvm/json_eigen.hpp"

namespace qsvm {
namespace {

constexpr std::pair<BaselineKind, const char*> kKindNames[] = {
    {BaselineKind::knn, "knn"},
    {BaselineKind::gaussian_nb, "gaussian_nb"},
    {BaselineKind::logistic_regression, "logistic_regression"},
    {BaselineKind::decision_tree, "decision_tree"},
    {BaselineKind::random_forest, "random_forest"},
    {BaselineKind::svm_linear, "svm_linear"},
    {BaselineKind::svm_rbf, "svm_rbf"},
};

void require_both_classes(const TrainingSet& train, const char* what) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < train.labels.size(); ++i) (train.labels[i] > 0 ? pos : neg) = true;
  if (!pos || !neg) throw std::invalid_argument(std::string(what) + " needs samples of both classes");
}

void check_train(const TrainingSet& train) {
  if (train.size() < 1) throw std::invalid_argument("baseline fit: empty training set");
  if (train.labels.size() != train.size()) throw std::invalid_argument("baseline fit: label count mismatch");
  for (Eigen::Index i = 0; i < train.labels.size(); ++i) {
    if (train.labels[i] != 1.0 && train.labels[i] != -1.0) throw std::invalid_argument("baseline fit: labels must be +1/-1");
  }
}

// --- KNN -------------------------------------------------------------------

double knn_score(const KnnState& s, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = s.samples.rows();
  std::vector<std::pair<double, Eigen::Index>> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) dist[i] = {(s.samples.row(i).transpose() - x).squaredNorm(), i};
  const auto k = std::min<Eigen::Index>(s.k, n);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double score = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) score += s.labels[dist[i].second];
  return score;
}

// --- Gaussian naive Bayes --------------------------------------------------

GaussianNbState fit_nb(const TrainingSet& train, double floor) {
  GaussianNbState s;
  const Eigen::Index d = train.features();
  auto stats = [&](double label, Eigen::VectorXd& mean, Eigen::VectorXd& var) {
    mean = Eigen::VectorXd::Zero(d);
    var = Eigen::VectorXd::Zero(d);
    int count = 0;
    for (Eigen::Index i = 0; i < train.size(); ++i) {
      if (train.labels[i] != label) continue;
      mean += train.samples.row(i).transpose();
      ++count;
    }
    if (count == 0) return 0;
    mean /= count;
    for (Eigen::Index i = 0; i < train.size(); ++i) {
      if (train.labels[i] == label) var += (train.samples.row(i).transpose() - mean).array().square().matrix();
    }
    var = (var / count).array() + floor;
    return count;
  };
  const int pos = stats(1.0, s.mean_pos, s.var_pos);
  const int neg = stats(-1.0, s.mean_neg, s.var_neg);
  s.has_pos = pos > 0;
  s.has_neg = neg > 0;
  const double total = pos + neg;
  if (s.has_pos) s.log_prior_pos = std::log(pos / total);
  if (s.has_neg) s.log_prior_neg = std::log(neg / total);
  return s;
}

double nb_log_likelihood(const Eigen::VectorXd& mean, const Eigen::VectorXd& var, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return -0.5 * ((x - mean).array().square() / var.array() + (2.0 * M_PI * var.array()).log()).sum();
}

double nb_score(const GaussianNbState& s, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!s.has_neg) return 1.0;
  if (!s.has_pos) return -1.0;
  return (s.log_prior_pos + nb_log_likelihood(s.mean_pos, s.var_pos, x)) -
         (s.log_prior_neg + nb_log_likelihood(s.mean_neg, s.var_neg, x));
}

// --- Logistic regression ---------------------------------------------------

LogisticState fit_logistic(const TrainingSet& train, const BaselineParams& p) {
  require_both_classes(train, "logistic regression");
  const Eigen::Index n = train.size();
  const double l2 = 1.0 / (p.lr_c * static_cast<double>(n));
  LogisticState s;
  s.weights = Eigen::VectorXd::Zero(train.features());
  for (int it = 0; it < p.lr_max_iterations; ++it) {
    const Eigen::VectorXd margin = train.labels.cwiseProduct((train.samples * s.weights).array().matrix() +
                                                             Eigen::VectorXd::Constant(n, s.intercept));
    // d/dm log(1 + e^-m) = -1 / (1 + e^m)
    const Eigen::VectorXd coeff =
        -(train.labels.array() / (1.0 + margin.array().exp())).matrix() / static_cast<double>(n);
    const Eigen::VectorXd grad_w = train.samples.transpose() * coeff + l2 * s.weights;
    const double grad_b = coeff.sum();
    s.iterations = it + 1;
    if (std::sqrt(grad_w.squaredNorm() + grad_b * grad_b) < p.lr_tolerance) break;
    s.weights -= p.lr_learning_rate * grad_w;
    s.intercept -= p.lr_learning_rate * grad_b;
  }
  return s;
}

// --- CART ------------------------------------------------------------------

double gini(double pos, double total) {
  if (total <= 0.0) return 0.0;
  const double p = pos / total;
  return 2.0 * p * (1.0 - p);
}

int majority(const TrainingSet& train, const std::vector<Eigen::Index>& rows) {
  double sum = 0.0;
  for (auto r : rows) sum += train.labels[r];
  return sign_label(sum);
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& train, const BaselineParams& p, int max_features, std::mt19937_64* rng)
      : train_(train), params_(p), max_features_(max_features), rng_(rng) {}

  TreeState build(std::vector<Eigen::Index> rows) {
    TreeState tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(TreeState& tree, std::vector<Eigen::Index> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].label = majority(train_, rows);

    double pos = 0.0;
    for (auto r : rows) pos += train_.labels[r] > 0 ? 1.0 : 0.0;
    const double total = static_cast<double>(rows.size());
    const double parent = gini(pos, total);
    if (depth >= params_.tree_max_depth || static_cast<int>(rows.size()) < params_.tree_min_samples_split ||
        parent == 0.0) {
      return id;
    }

    std::vector<int> features(train_.features());
    std::iota(features.begin(), features.end(), 0);
    if (max_features_ > 0 && max_features_ < static_cast<int>(features.size()) && rng_) {
      std::shuffle(features.begin(), features.end(), *rng_);
      features.resize(max_features_);
      std::sort(features.begin(), features.end());
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = parent;
    std::vector<std::pair<double, double>> column(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {train_.samples(rows[i], f), train_.labels[rows[i]]};
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second > 0 ? 1.0 : 0.0;
        if (column[i].first == column[i + 1].first) continue;
        const double left = static_cast<double>(i + 1);
        const double right = total - left;
        const double impurity = (left * gini(left_pos, left) + right * gini(pos - left_pos, right)) / total;
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Eigen::Index> left_rows, right_rows;
    for (auto r : rows) (train_.samples(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    const int left = grow(tree, std::move(left_rows), depth + 1);
    const int right = grow(tree, std::move(right_rows), depth + 1);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  const TrainingSet& train_;
  const BaselineParams& params_;
  int max_features_;
  std::mt19937_64* rng_;
};

int tree_predict(const TreeState& tree, const Eigen::Ref<const Eigen::VectorXd>& x) {
  int node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& n = tree.nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[node].label;
}

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

ForestState fit_forest(const TrainingSet& train, const BaselineParams& p, std::uint64_t seed) {
  const int mtry = p.forest_max_features > 0
                       ? p.forest_max_features
                       : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(train.features())))));
  ForestState forest;
  for (int t = 0; t < p.forest_trees; ++t) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::uniform_int_distribution<Eigen::Index> pick(0, train.size() - 1);
    std::vector<Eigen::Index> rows(train.size());
    for (auto& r : rows) r = pick(rng);
    forest.trees.push_back(TreeBuilder(train, p, mtry, &rng).build(std::move(rows)));
  }
  return forest;
}

// --- Kernel SVM by dual coordinate ascent -----------------------------------
// The bias is absorbed by augmenting the kernel with a constant 1, which
// removes the equality constraint from the dual.

KernelSvmState fit_kernel_svm(const TrainingSet& train, const BaselineParams& p, Kernel kernel) {
  require_both_classes(train, "kernel SVM");
  const Eigen::Index n = train.size();
  const Eigen::MatrixXd gram = kernel_matrix(kernel, train.samples, train.samples).array() + 1.0;
  KernelSvmState s;
  s.kernel = kernel;
  s.samples = train.samples;
  s.labels = train.labels;
  s.alphas = Eigen::VectorXd::Zero(n);
  const double c = p.svm_c;

  for (int sweep = 0; sweep < p.svm_max_sweeps; ++sweep) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double f = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) f += s.alphas[j] * train.labels[j] * gram(i, j);
      const double g = train.labels[i] * f - 1.0;
      double pg = g;
      if (s.alphas[i] <= 0.0) pg = std::min(g, 0.0);
      else if (s.alphas[i] >= c) pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg != 0.0 && gram(i, i) > 0.0) s.alphas[i] = std::clamp(s.alphas[i] - g / gram(i, i), 0.0, c);
    }
    s.sweeps = sweep + 1;
    if (worst < p.svm_tolerance) break;
  }
  s.bias = s.alphas.cwiseProduct(train.labels).sum();
  return s;
}

double kernel_svm_score(const KernelSvmState& s, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double f = s.bias;
  for (Eigen::Index i = 0; i < s.alphas.size(); ++i) {
    if (s.alphas[i] != 0.0) f += s.alphas[i] * s.labels[i] * kernel_eval(s.kernel, s.samples.row(i).transpose(), x);
  }
  return f;
}

// --- serialisation helpers ----------------------------------------------------

nlohmann::json tree_to_json(const TreeState& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
  return nodes;
}

TreeState tree_from_json(const nlohmann::json& j) {
  TreeState t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<int>()});
  }
  return t;
}

}  // namespace

std::string to_string(BaselineKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

BaselineKind baseline_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw std::invalid_argument("unknown baseline kind: " + name);
}

nlohmann::json to_json(const BaselineParams& p) {
  return {{"knn_k", p.knn_k},
          {"nb_variance_floor", p.nb_variance_floor},
          {"lr_learning_rate", p.lr_learning_rate},
          {"lr_c", p.lr_c},
          {"lr_tolerance", p.lr_tolerance},
          {"lr_max_iterations", p.lr_max_iterations},
          {"tree_max_depth", p.tree_max_depth},
          {"tree_min_samples_split", p.tree_min_samples_split},
          {"forest_trees", p.forest_trees},
          {"forest_max_features", p.forest_max_features},
          {"svm_c", p.svm_c},
          {"svm_gamma", p.svm_gamma},
          {"svm_tolerance", p.svm_tolerance},
          {"svm_max_sweeps", p.svm_max_sweeps}};
}

BaselineParams baseline_params_from_json(const nlohmann::json& j) {
  BaselineParams p;
  p.knn_k = j.value("knn_k", p.knn_k);
  p.nb_variance_floor = j.value("nb_variance_floor", p.nb_variance_floor);
  p.lr_learning_rate = j.value("lr_learning_rate", p.lr_learning_rate);
  p.lr_c = j.value("lr_c", p.lr_c);
  p.lr_tolerance = j.value("lr_tolerance", p.lr_tolerance);
  p.lr_max_iterations = j.value("lr_max_iterations", p.lr_max_iterations);
  p.tree_max_depth = j.value("tree_max_depth", p.tree_max_depth);
  p.tree_min_samples_split = j.value("tree_min_samples_split", p.tree_min_samples_split);
  p.forest_trees = j.value("forest_trees", p.forest_trees);
  p.forest_max_features = j.value("forest_max_features", p.forest_max_features);
  p.svm_c = j.value("svm_c", p.svm_c);
  p.svm_gamma = j.value("svm_gamma", p.svm_gamma);
  p.svm_tolerance = j.value("svm_tolerance", p.svm_tolerance);
  p.svm_max_sweeps = j.value("svm_max_sweeps", p.svm_max_sweeps);
  if (p.knn_k < 1 || p.forest_trees < 1 || p.tree_max_depth < 0 || !(p.svm_c > 0.0) || !(p.lr_c > 0.0)) {
    throw std::invalid_argument("baseline params out of range");
  }
  return p;
}

BaselineModel fit(BaselineKind kind, const BaselineParams& params, const TrainingSet& train, std::uint64_t seed) {
  check_train(train);
  BaselineModel model;
  model.kind = kind;
  model.params = params;
  model.features = train.features();
  switch (kind) {
    case BaselineKind::knn:
      model.state = KnnState{params.knn_k, train.samples, train.labels};
      break;
    case BaselineKind::gaussian_nb:
      model.state = fit_nb(train, params.nb_variance_floor);
      break;
    case BaselineKind::logistic_regression:
      model.state = fit_logistic(train, params);
      break;
    case BaselineKind::decision_tree:
      model.state = TreeBuilder(train, params, 0, nullptr).build(all_rows(train.size()));
      break;
    case BaselineKind::random_forest:
      model.state = fit_forest(train, params, seed);
      break;
    case BaselineKind::svm_linear:
      model.state = fit_kernel_svm(train, params, Kernel{KernelKind::linear, 1.0, 1.0});
      break;
    case BaselineKind::svm_rbf: {
      double gamma = params.svm_gamma;
      if (gamma <= 0.0) {
        const double mean = train.samples.mean();
        const double var = (train.samples.array() - mean).square().mean();
        gamma = var > 0.0 ? 1.0 / (static_cast<double>(train.features()) * var) : 1.0;
      }
      model.state = fit_kernel_svm(train, params, Kernel{KernelKind::rbf, 1.0, gamma});
      break;
    }
  }
  return model;
}

double decision_score(const BaselineModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.features) {
    throw std::invalid_argument("baseline predict: query has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.features));
  }
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, KnnState>) {
          return knn_score(s, x);
        } else if constexpr (std::is_same_v<S, GaussianNbState>) {
          return nb_score(s, x);
        } else if constexpr (std::is_same_v<S, LogisticState>) {
          return s.weights.dot(x) + s.intercept;
        } else if constexpr (std::is_same_v<S, TreeState>) {
          return tree_predict(s, x);
        } else if constexpr (std::is_same_v<S, ForestState>) {
          double votes = 0.0;
          for (const auto& t : s.trees) votes += tree_predict(t, x);
          return votes;
        } else {
          return kernel_svm_score(s, x);
        }
      },
      model.state);
}

int predict(const BaselineModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return sign_label(decision_score(model, x));
}

nlohmann::json to_json(const BaselineModel& model) {
  nlohmann::json state = std::visit(
      [](const auto& s) -> nlohmann::json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, KnnState>) {
          return {{"k", s.k}, {"samples", matrix_to_json(s.samples)}, {"labels", vector_to_json(s.labels)}};
        } else if constexpr (std::is_same_v<S, GaussianNbState>) {
          return {{"has_pos", s.has_pos},
                  {"has_neg", s.has_neg},
                  {"log_prior_pos", s.log_prior_pos},
                  {"log_prior_neg", s.log_prior_neg},
                  {"mean_pos", vector_to_json(s.mean_pos)},
                  {"var_pos", vector_to_json(s.var_pos)},
                  {"mean_neg", vector_to_json(s.mean_neg)},
                  {"var_neg", vector_to_json(s.var_neg)}};
        } else if constexpr (std::is_same_v<S, LogisticState>) {
          return {{"weights", vector_to_json(s.weights)}, {"intercept", s.intercept}, {"iterations", s.iterations}};
        } else if constexpr (std::is_same_v<S, TreeState>) {
          return {{"nodes", tree_to_json(s)}};
        } else if constexpr (std::is_same_v<S, ForestState>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : s.trees) trees.push_back(tree_to_json(t));
          return {{"trees", trees}};
        } else {
          return {{"kernel", to_json(s.kernel)},
                  {"alphas", vector_to_json(s.alphas)},
                  {"bias", s.bias},
                  {"samples", matrix_to_json(s.samples)},
                  {"labels", vector_to_json(s.labels)},
                  {"sweeps", s.sweeps}};
        }
      },
      model.state);
  return {{"kind", to_string(model.kind)}, {"features", model.features}, {"params", to_json(model.params)}, {"state", state}};
}

BaselineModel baseline_from_json(const nlohmann::json& j) {
  BaselineModel m;
  m.kind = baseline_kind_from_string(j.at("kind").get<std::string>());
  m.features = j.at("features").get<Eigen::Index>();
  m.params = baseline_params_from_json(j.at("params"));
  const auto& s = j.at("state");
  switch (m.kind) {
    case BaselineKind::knn:
      m.state = KnnState{s.at("k").get<int>(), matrix_from_json(s.at("samples")), vector_from_json(s.at("labels"))};
      break;
    case BaselineKind::gaussian_nb: {
      GaussianNbState nb;
      nb.has_pos = s.at("has_pos").get<bool>();
      nb.has_neg = s.at("has_neg").get<bool>();
      nb.log_prior_pos = s.at("log_prior_pos").get<double>();
      nb.log_prior_neg = s.at("log_prior_neg").get<double>();
      nb.mean_pos = vector_from_json(s.at("mean_pos"));
      nb.var_pos = vector_from_json(s.at("var_pos"));
      nb.mean_neg = vector_from_json(s.at("mean_neg"));
      nb.var_neg = vector_from_json(s.at("var_neg"));
      m.state = nb;
      break;
    }
    case BaselineKind::logistic_regression:
      m.state = LogisticState{vector_from_json(s.at("weights")), s.at("intercept").get<double>(),
                              s.at("iterations").get<int>()};
      break;
    case BaselineKind::decision_tree:
      m.state = tree_from_json(s.at("nodes"));
      break;
    case BaselineKind::random_forest: {
      ForestState f;
      for (const auto& t : s.at("trees")) f.trees.push_back(tree_from_json(t));
      m.state = f;
      break;
    }
    case BaselineKind::svm_linear:
    case BaselineKind::svm_rbf:
      m.state = KernelSvmState{kernel_from_json(s.at("kernel")), vector_from_json(s.at("alphas")),
                               s.at("bias").get<double>(), matrix_from_json(s.at("samples")),
                               vector_from_json(s.at("labels")), s.at("sweeps").get<int>()};
      break;
  }
  return m;
}

}  // namespace qsvm
