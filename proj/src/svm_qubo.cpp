#include "qsvm/svm_qubo.hpp"

#include "qsvm/json_eigen.hpp"

#include <cmath>
#include <stdexcept>

namespace qsvm {

double kernel_eval(const Kernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& x1,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x1.size() != x2.size()) {
    throw std::invalid_argument("kernel_eval: dimension mismatch (" + std::to_string(x1.size()) + " vs " +
                                std::to_string(x2.size()) + ")");
  }
  switch (kernel.kind) {
    case KernelKind::linear:
      return kernel.scale * x1.dot(x2);
    case KernelKind::rbf:
      return std::exp(-kernel.gamma * (x1 - x2).squaredNorm());
  }
  throw std::invalid_argument("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd kernel_matrix(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel_eval(kernel, a.row(i).transpose(), b.row(j).transpose());
  }
  return k;
}

void validate(const TrainingSet& train) {
  if (train.samples.rows() < 2) throw std::invalid_argument("training set needs at least 2 samples");
  if (train.labels.size() != train.samples.rows()) {
    throw std::invalid_argument("training set: label count does not match sample count");
  }
  if (!train.samples.allFinite()) throw std::invalid_argument("training set: non-finite feature value");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < train.labels.size(); ++i) {
    if (train.labels[i] == 1.0) pos = true;
    else if (train.labels[i] == -1.0) neg = true;
    else throw std::invalid_argument("training set: labels must be +1 or -1");
  }
  if (!pos || !neg) throw std::invalid_argument("training set must contain both classes");
}

double EncodingConfig::cap() const {
  double total = 0.0;
  for (int k = 0; k < bits_per_alpha; ++k) total += std::pow(base, k);
  return total;
}

void validate(const EncodingConfig& cfg) {
  if (!(cfg.base > 0.0) || !std::isfinite(cfg.base)) throw std::invalid_argument("encoding base must be > 0");
  if (cfg.bits_per_alpha < 1) throw std::invalid_argument("bits_per_alpha must be >= 1");
  if (!(cfg.xi >= 0.0)) throw std::invalid_argument("encoding multiplier xi must be >= 0");
  const double c = cfg.cap();
  if (!std::isfinite(c) || c <= 0.0) throw std::invalid_argument("encoding cap is not finite and positive");
}

QuboMatrix build_qubo(const TrainingSet& train, const EncodingConfig& cfg) {
  validate(train);
  validate(cfg);
  const Eigen::Index n = train.size();
  const int kb = cfg.bits_per_alpha;
  const Eigen::MatrixXd gram = kernel_matrix(cfg.kernel, train.samples, train.samples);

  std::vector<double> powers(2 * kb);
  for (int p = 0; p < 2 * kb; ++p) powers[p] = std::pow(cfg.base, p);

  QuboMatrix q(n * kb, n * kb);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double coupling = train.labels[a] * train.labels[b] * (gram(a, b) + cfg.xi);
      for (int k = 0; k < kb; ++k) {
        for (int j = 0; j < kb; ++j) {
          double v = 0.5 * powers[k + j] * coupling;
          if (a == b && k == j) v -= powers[k];
          q(a * kb + k, b * kb + j) = v;
        }
      }
    }
  }
  return symmetrize(q);
}

Eigen::VectorXd decode_alphas(const Bitstring& a, const EncodingConfig& cfg, Eigen::Index n) {
  const auto kb = static_cast<std::size_t>(cfg.bits_per_alpha);
  if (n < 0 || a.size() != static_cast<std::size_t>(n) * kb) {
    throw std::invalid_argument("decode_alphas: bitstring length " + std::to_string(a.size()) + " != N*K = " +
                                std::to_string(n * static_cast<Eigen::Index>(kb)));
  }
  Eigen::VectorXd alphas = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double place = 1.0;
    for (std::size_t k = 0; k < kb; ++k) {
      if (a[i * kb + k]) alphas[i] += place;
      place *= cfg.base;
    }
  }
  return alphas;
}

double compute_bias(const Eigen::VectorXd& alphas, const TrainingSet& train, const Kernel& kernel, double c) {
  const Eigen::Index n = train.size();
  if (alphas.size() != n) throw std::invalid_argument("compute_bias: alpha count does not match training set");
  const Eigen::MatrixXd gram = kernel_matrix(kernel, train.samples, train.samples);
  const Eigen::VectorXd weighted = alphas.cwiseProduct(train.labels);
  const Eigen::VectorXd residual = train.labels - gram * weighted;

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = alphas[i] * (c - alphas[i]);
    num += w * residual[i];
    den += w;
  }
  if (den != 0.0) return num / den;

  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alphas[i] > 0.0) {
      sum += residual[i];
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

double decision_value(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.support.features()) {
    throw std::invalid_argument("decision_value: query has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.support.features()));
  }
  double f = model.bias;
  for (Eigen::Index i = 0; i < model.alphas.size(); ++i) {
    if (model.alphas[i] == 0.0) continue;
    f += model.alphas[i] * model.support.labels[i] * kernel_eval(model.kernel, model.support.samples.row(i).transpose(), x);
  }
  return f;
}

int predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return sign_label(decision_value(model, x));
}

SvmModel model_from_state(const Bitstring& a, const TrainingSet& train, const EncodingConfig& cfg) {
  SvmModel model;
  model.alphas = decode_alphas(a, cfg, train.size());
  model.bias = compute_bias(model.alphas, train, cfg.kernel, cfg.cap());
  model.support = train;
  model.kernel = cfg.kernel;
  return model;
}

nlohmann::json to_json(const Kernel& kernel) {
  if (kernel.kind == KernelKind::linear) return {{"kind", "linear"}, {"scale", kernel.scale}};
  return {{"kind", "rbf"}, {"gamma", kernel.gamma}};
}

Kernel kernel_from_json(const nlohmann::json& j) {
  Kernel k;
  const auto kind = j.value("kind", std::string("linear"));
  if (kind == "linear") {
    k.kind = KernelKind::linear;
    k.scale = j.value("scale", 1.0);
  } else if (kind == "rbf") {
    k.kind = KernelKind::rbf;
    k.gamma = j.value("gamma", 1.0);
  } else {
    throw std::invalid_argument("unknown kernel kind: " + kind);
  }
  return k;
}

nlohmann::json to_json(const EncodingConfig& cfg) {
  return {{"base", cfg.base}, {"bits_per_alpha", cfg.bits_per_alpha}, {"xi", cfg.xi}, {"kernel", to_json(cfg.kernel)}};
}

EncodingConfig encoding_from_json(const nlohmann::json& j) {
  EncodingConfig cfg;
  cfg.base = j.value("base", cfg.base);
  cfg.bits_per_alpha = j.value("bits_per_alpha", cfg.bits_per_alpha);
  cfg.xi = j.value("xi", cfg.xi);
  if (j.contains("kernel")) cfg.kernel = kernel_from_json(j.at("kernel"));
  validate(cfg);
  return cfg;
}

nlohmann::json to_json(const SvmModel& model) {
  std::vector<double> alphas(model.alphas.data(), model.alphas.data() + model.alphas.size());
  std::vector<double> labels(model.support.labels.data(), model.support.labels.data() + model.support.labels.size());
  return {{"alphas", alphas},
          {"bias", model.bias},
          {"kernel", to_json(model.kernel)},
          {"support_samples", matrix_to_json(model.support.samples)},
          {"support_labels", labels}};
}

SvmModel svm_model_from_json(const nlohmann::json& j) {
  SvmModel m;
  const auto alphas = j.at("alphas").get<std::vector<double>>();
  const auto labels = j.at("support_labels").get<std::vector<double>>();
  m.alphas = Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
  m.support.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  m.support.samples = matrix_from_json(j.at("support_samples"));
  m.bias = j.at("bias").get<double>();
  m.kernel = kernel_from_json(j.at("kernel"));
  if (m.alphas.size() != m.support.samples.rows() || m.support.labels.size() != m.support.samples.rows()) {
    throw std::invalid_argument("SVM model JSON: alphas, labels and samples disagree in length");
  }
  return m;
}

}  // namespace qsvm
