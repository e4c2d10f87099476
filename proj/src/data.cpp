#include "qsvm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qsvm/util.hpp"

namespace qsvm {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(first, last - first + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class Rng>
void fisher_yates(std::vector<Eigen::Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

}  // namespace

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset d;
  d.feature_names = feature_names;
  d.samples.resize(static_cast<Eigen::Index>(rows.size()), features());
  d.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.samples.row(i) = samples.row(rows[i]);
    d.labels[i] = labels[rows[i]];
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, const std::string& positive_label) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw std::invalid_argument("dataset " + path.string() + " is empty");
  const auto header = split_row(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw std::invalid_argument("dataset " + path.string() + " has no column '" + label_column + "'");
  }
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  Dataset d;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) d.feature_names.push_back(header[c]);
  const auto n_features = static_cast<Eigen::Index>(d.feature_names.size());

  std::vector<double> values;
  std::vector<double> labels;
  std::vector<std::string> problems;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      problems.push_back("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields, found " +
                         std::to_string(cells.size()));
      continue;
    }
    std::vector<double> parsed;
    bool ok = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) continue;
      if (cells[c].empty()) {
        problems.push_back("row " + std::to_string(row) + ": missing value in '" + header[c] + "'");
        ok = false;
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[c].size() || !std::isfinite(v)) {
        problems.push_back("row " + std::to_string(row) + ": non-numeric value '" + cells[c] + "' in '" + header[c] + "'");
        ok = false;
        continue;
      }
      parsed.push_back(v);
    }
    if (cells[label_idx].empty()) {
      problems.push_back("row " + std::to_string(row) + ": missing label");
      ok = false;
    }
    if (!ok) continue;
    values.insert(values.end(), parsed.begin(), parsed.end());
    labels.push_back(cells[label_idx] == positive_label ? 1.0 : -1.0);
  }
  if (!problems.empty()) {
    std::string msg = "dataset " + path.string() + " has " + std::to_string(problems.size()) + " bad row(s):";
    for (std::size_t i = 0; i < problems.size() && i < 10; ++i) msg += "\n  " + problems[i];
    throw std::invalid_argument(msg);
  }
  if (labels.empty()) throw std::invalid_argument("dataset " + path.string() + " has no data rows");

  const auto m = static_cast<Eigen::Index>(labels.size());
  d.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), m,
                                                                                                      n_features);
  d.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), m);
  return d;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& pool) {
  if (pool.rows() < 1) throw std::invalid_argument("standardize: empty pool");
  Standardizer s;
  s.mean = pool.colwise().mean();
  s.scale = ((pool.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(pool.rows())).sqrt();
  for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
    if (!(s.scale[c] > 0.0)) {
      s.scale[c] = 0.0;
      s.constant_features.push_back(c);
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw std::invalid_argument("standardize: feature count mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (scale[c] > 0.0) out.col(c) = (x.col(c).array() - mean[c]) / scale[c];
    else out.col(c).setZero();
  }
  return out;
}

Dataset Standardizer::apply(const Dataset& d) const {
  Dataset out = d;
  out.samples = apply(d.samples);
  return out;
}

std::pair<Dataset, std::vector<Dataset>> standardize(const Dataset& pool, const std::vector<Dataset>& others,
                                                     Standardizer* fitted) {
  const auto s = Standardizer::fit(pool.samples);
  for (auto c : s.constant_features) {
    const std::string name = c < static_cast<Eigen::Index>(pool.feature_names.size()) ? pool.feature_names[c]
                                                                                      : "#" + std::to_string(c);
    std::clog << "warning: feature " << name << " is constant on the pool; mapped to 0\n";
  }
  std::vector<Dataset> rest;
  for (const auto& d : others) rest.push_back(s.apply(d));
  if (fitted) *fitted = s;
  return {s.apply(pool), std::move(rest)};
}

Eigen::Index pool_size(const SplitSpec& spec, Eigen::Index dataset_size) {
  return static_cast<Eigen::Index>(std::lround(spec.pool_fraction * static_cast<double>(dataset_size)));
}

void validate(const SplitSpec& spec, Eigen::Index dataset_size) {
  if (!(spec.pool_fraction > 0.0 && spec.pool_fraction < 1.0)) {
    throw std::invalid_argument("split: pool_fraction must lie strictly between 0 and 1");
  }
  if (spec.train_size < 2) throw std::invalid_argument("split: train_size must be at least 2");
  if (spec.repeats < 1) throw std::invalid_argument("split: repeats must be at least 1");
  const auto pool = pool_size(spec, dataset_size);
  if (spec.train_size > pool) {
    throw std::invalid_argument("split: train_size " + std::to_string(spec.train_size) + " exceeds the pool of " +
                                std::to_string(pool));
  }
  if (pool >= dataset_size) throw std::invalid_argument("split: the test part would be empty");
}

Split make_split(const Dataset& data, const SplitSpec& spec, int repeat) {
  validate(spec, data.size());
  const auto r = static_cast<std::uint64_t>(repeat);
  std::vector<Eigen::Index> order(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) order[i] = i;
  std::mt19937_64 partition_rng(derive_seed(spec.seed, 2 * r));
  fisher_yates(order, partition_rng);

  const auto pool_n = pool_size(spec, data.size());
  Split s;
  s.repeat = repeat;
  std::vector<Eigen::Index> pool(order.begin(), order.begin() + pool_n);
  s.test.assign(order.begin() + pool_n, order.end());

  std::mt19937_64 draw_rng(derive_seed(spec.seed, 2 * r + 1));
  std::vector<Eigen::Index> chosen;
  if (spec.stratified) {
    std::vector<Eigen::Index> pos, neg;
    for (auto i : pool) (data.labels[i] > 0 ? pos : neg).push_back(i);
    const auto want_pos = static_cast<std::size_t>((spec.train_size + 1) / 2);
    const auto want_neg = static_cast<std::size_t>(spec.train_size / 2);
    if (pos.size() < want_pos || neg.size() < want_neg) {
      throw std::invalid_argument("split: stratified draw of " + std::to_string(spec.train_size) +
                                  " needs more samples of one class than the pool holds");
    }
    fisher_yates(pos, draw_rng);
    fisher_yates(neg, draw_rng);
    chosen.assign(pos.begin(), pos.begin() + want_pos);
    chosen.insert(chosen.end(), neg.begin(), neg.begin() + want_neg);
  } else {
    auto shuffled = pool;
    fisher_yates(shuffled, draw_rng);
    chosen.assign(shuffled.begin(), shuffled.begin() + spec.train_size);
  }
  std::sort(chosen.begin(), chosen.end());
  s.train = chosen;
  for (auto i : pool)
    if (!std::binary_search(chosen.begin(), chosen.end(), i)) s.validation.push_back(i);
  return s;
}

std::vector<Split> make_splits(const Dataset& data, const SplitSpec& spec) {
  std::vector<Split> out;
  for (int r = 0; r < spec.repeats; ++r) out.push_back(make_split(data, spec, r));
  return out;
}

PreparedSplit prepare_split(const Dataset& data, const Split& split) {
  PreparedSplit p;
  p.split = split;
  std::vector<Eigen::Index> pool = split.train;
  pool.insert(pool.end(), split.validation.begin(), split.validation.end());
  auto [std_pool, rest] = standardize(data.subset(pool), {data.subset(split.train), data.subset(split.validation),
                                                           data.subset(split.test)},
                                      &p.standardizer);
  (void)std_pool;
  p.train = std::move(rest[0]);
  p.validation = std::move(rest[1]);
  p.test = std::move(rest[2]);
  return p;
}

}  // namespace qsvm
