#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "qsvm/qubo.hpp"

namespace qsvm {

enum class KernelKind { linear, rbf };

/// Linear: scale * <x1, x2>. RBF: exp(-gamma * |x1 - x2|^2).
struct Kernel {
  KernelKind kind = KernelKind::linear;
  double scale = 1.0;
  double gamma = 1.0;
};

double kernel_eval(const Kernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& x1,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

/// Gram matrix over the rows of `a` against the rows of `b`.
Eigen::MatrixXd kernel_matrix(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Samples are rows; labels are +1 / -1.
struct TrainingSet {
  Eigen::MatrixXd samples;
  Eigen::VectorXd labels;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index features() const { return samples.cols(); }
};

/// Throws std::invalid_argument on fewer than two samples, labels outside
/// {-1, +1}, a size mismatch, or a missing class.
void validate(const TrainingSet& train);

struct EncodingConfig {
  double base = 2.0;
  int bits_per_alpha = 2;
  double xi = 1.0;
  Kernel kernel;

  /// Largest encodable coefficient, sum_k base^k.
  double cap() const;
};

void validate(const EncodingConfig& cfg);

struct SvmModel {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  TrainingSet support;
  Kernel kernel;
};

/// The KN x KN matrix whose quadratic form is the penalised SVM dual over
/// binary-encoded coefficients, returned symmetrised.
QuboMatrix build_qubo(const TrainingSet& train, const EncodingConfig& cfg);

/// alpha_n = sum_k base^k * a[K n + k].
Eigen::VectorXd decode_alphas(const Bitstring& a, const EncodingConfig& cfg, Eigen::Index n);

/// Weighted-average bias over coefficients strictly inside (0, c).
///
/// When no coefficient is interior the weights vanish; the bias then falls
/// back to the mean residual over samples with alpha > 0, or 0 when every
/// alpha is zero.
double compute_bias(const Eigen::VectorXd& alphas, const TrainingSet& train, const Kernel& kernel, double c);

double decision_value(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Sign of the decision value; exactly zero maps to +1.
int predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

inline int sign_label(double value) { return value >= 0.0 ? 1 : -1; }

SvmModel model_from_state(const Bitstring& a, const TrainingSet& train, const EncodingConfig& cfg);

nlohmann::json to_json(const Kernel& kernel);
Kernel kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EncodingConfig& cfg);
EncodingConfig encoding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SvmModel& model);
SvmModel svm_model_from_json(const nlohmann::json& j);

}  // namespace qsvm
