#include "qsvm/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace qsvm {

Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                                std::to_string(y_pred.size()) + " predictions");
  }
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] > 0;
    const bool predicted = y_pred[i] > 0;
    if (actual && predicted) ++c.tp;
    else if (!actual && predicted) ++c.fp;
    else if (!actual) ++c.tn;
    else ++c.fn;
  }
  return c;
}

Confusion confusion(const Eigen::VectorXd& y_true, const std::vector<int>& y_pred) {
  std::vector<int> labels(y_true.size());
  for (Eigen::Index i = 0; i < y_true.size(); ++i) labels[i] = y_true[i] > 0 ? 1 : -1;
  return confusion(labels, y_pred);
}

Metrics metrics(const Confusion& c) {
  if (c.total() < 1) throw std::invalid_argument("metrics: empty confusion matrix");
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = ratio(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn);
  return m;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::precision: return "precision";
    case Metric::recall: return "recall";
    case Metric::f1: return "f1";
  }
  return "unknown";
}

Metric metric_from_string(const std::string& name) {
  for (auto m : {Metric::accuracy, Metric::precision, Metric::recall, Metric::f1})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown metric '" + name + "' (expected accuracy, precision, recall or f1)");
}

double value(const Metrics& m, Metric which) {
  switch (which) {
    case Metric::accuracy: return m.accuracy;
    case Metric::precision: return m.precision;
    case Metric::recall: return m.recall;
    case Metric::f1: return m.f1;
  }
  return 0.0;
}

MetricsReport aggregate(const std::vector<SplitMetrics>& splits) {
  if (splits.empty()) throw std::invalid_argument("aggregate: no splits");
  MetricsReport r;
  r.per_split = splits;
  const double n = static_cast<double>(splits.size());
  auto field = [](Metrics& m, int k) -> double& {
    switch (k) {
      case 0: return m.accuracy;
      case 1: return m.precision;
      case 2: return m.recall;
      default: return m.f1;
    }
  };
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (auto s : splits) sum += field(s.metrics, k);
    const double mean = sum / n;
    double ss = 0.0;
    for (auto s : splits) ss += (field(s.metrics, k) - mean) * (field(s.metrics, k) - mean);
    field(r.mean, k) = mean;
    field(r.std, k) = std::sqrt(ss / n);
  }
  return r;
}

nlohmann::json to_json(const Confusion& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}; }

nlohmann::json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : r.per_split) splits.push_back({{"metrics", to_json(s.metrics)}, {"confusion", to_json(s.confusion)}});
  return {{"per_split", splits}, {"mean", to_json(r.mean)}, {"std", to_json(r.std)}};
}

}  // namespace qsvm
