#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qsvm/svm_qubo.hpp"

namespace qsvm {

struct Dataset {
  Eigen::MatrixXd samples;
  Eigen::VectorXd labels;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index features() const { return samples.cols(); }

  Dataset subset(const std::vector<Eigen::Index>& rows) const;
  TrainingSet training_set() const { return {samples, labels}; }
};

/// Reads a header + rows CSV. Every column except `label_column` is a numeric
/// feature; rows whose label equals `positive_label` become +1, all others -1.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, const std::string& positive_label);

/// Per-feature z-score fitted on a pool.
struct Standardizer {
  Eigen::RowVectorXd mean;
  /// Population standard deviation; zero marks a constant feature.
  Eigen::RowVectorXd scale;
  std::vector<Eigen::Index> constant_features;

  static Standardizer fit(const Eigen::MatrixXd& pool);
  /// Constant features map to 0.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Dataset apply(const Dataset& d) const;
};

/// Standardizes `pool` against itself and every dataset in `others` with the
/// pool's statistics. Logs a warning for each constant feature.
std::pair<Dataset, std::vector<Dataset>> standardize(const Dataset& pool, const std::vector<Dataset>& others,
                                                     Standardizer* fitted = nullptr);

struct SplitSpec {
  double pool_fraction = 0.6;
  int train_size = 6;
  int repeats = 10;
  std::uint64_t seed = 0;
  bool stratified = true;
};

void validate(const SplitSpec& spec, Eigen::Index dataset_size);

/// Indices into the full dataset. train and validation partition the pool.
struct Split {
  int repeat = 0;
  std::vector<Eigen::Index> train, validation, test;
};

/// round(pool_fraction * M).
Eigen::Index pool_size(const SplitSpec& spec, Eigen::Index dataset_size);

/// Split for one repeat, a pure function of (data, spec.seed, repeat). The
/// pool/test partition does not depend on train_size, so every train size
/// of a repeat is scored on the same test set. Stratified draws take
/// ceil(n/2) positives and floor(n/2) negatives.
Split make_split(const Dataset& data, const SplitSpec& spec, int repeat);
std::vector<Split> make_splits(const Dataset& data, const SplitSpec& spec);

/// A split with pool-fitted standardization applied.
struct PreparedSplit {
  Split split;
  Standardizer standardizer;
  Dataset train, validation, test;
};

PreparedSplit prepare_split(const Dataset& data, const Split& split);

}  // namespace qsvm
