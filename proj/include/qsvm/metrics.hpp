#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace qsvm {

/// Counts with +1 as the positive class.
struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);
Confusion confusion(const Eigen::VectorXd& y_true, const std::vector<int>& y_pred);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Zero-denominator conventions: precision, recall and f1 are 0 when their
/// denominators vanish.
Metrics metrics(const Confusion& c);

enum class Metric { accuracy, precision, recall, f1 };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& name);
double value(const Metrics& m, Metric which);

struct SplitMetrics {
  Metrics metrics;
  Confusion confusion;
};

struct MetricsReport {
  std::vector<SplitMetrics> per_split;
  Metrics mean;
  /// Population standard deviation (divisor n).
  Metrics std;
};

MetricsReport aggregate(const std::vector<SplitMetrics>& splits);

nlohmann::json to_json(const Confusion& c);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const MetricsReport& r);

}  // namespace qsvm
