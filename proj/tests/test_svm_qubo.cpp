#include <gtest/gtest.h>

#include <random>
#include <set>

#include "qsvm/svm_qubo.hpp"

using namespace qsvm;

namespace {

TrainingSet random_set(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  TrainingSet t{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) t.samples(i, j) = g(rng);
    t.labels[i] = i % 2 ? -1.0 : 1.0;
  }
  return t;
}

// 1/2 sum_nm alpha_n alpha_m y_n y_m (k(x_n, x_m) + xi) - sum_n alpha_n,
// alphas decoded by hand from base-2 bits.
double dual_objective(const TrainingSet& t, const Bitstring& a, double scale, double xi) {
  const auto n = t.size();
  std::vector<double> alpha(n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) alpha[i] = a[2 * i] + 2.0 * a[2 * i + 1];
  double quad = 0, lin = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    lin += alpha[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double k = scale * t.samples.row(i).dot(t.samples.row(j));
      quad += alpha[i] * alpha[j] * t.labels[i] * t.labels[j] * (k + xi);
    }
  }
  return 0.5 * quad - lin;
}

}  // namespace

TEST(SvmQubo, EnergyIsThePenalisedDual) {
  std::mt19937_64 rng(11);
  EncodingConfig cfg;
  cfg.kernel.scale = 0.25;
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_set(3, 4, rng);
    const auto q = build_qubo(t, cfg);
    ASSERT_EQ(q.rows(), 6);
    for (std::uint64_t s = 0; s < 64; ++s) {
      const auto a = bitstring_from_index(s, 6);
      EXPECT_NEAR(energy(q, a), dual_objective(t, a, 0.25, 1.0), 1e-9);
    }
  }
}

TEST(SvmQubo, HandComputedTwoSampleMatrix) {
  // x = 1, 2 with labels +1, -1: y y (k + xi) is 2, -3, 5
  TrainingSet t{Eigen::MatrixXd(2, 1), Eigen::VectorXd(2)};
  t.samples << 1, 2;
  t.labels << 1, -1;
  const auto q = build_qubo(t, EncodingConfig{});
  Eigen::MatrixXd expected(4, 4);
  expected << 0, 2, -1.5, -3,
              2, 2, -3, -6,
              -1.5, -3, 1.5, 5,
              -3, -6, 5, 8;
  EXPECT_TRUE(q.isApprox(expected, 1e-14)) << q;
}

TEST(SvmQubo, GlobalLabelFlipLeavesMatrixUnchanged) {
  std::mt19937_64 rng(12);
  auto t = random_set(4, 3, rng);
  const auto q = build_qubo(t, EncodingConfig{});
  t.labels = -t.labels;
  EXPECT_TRUE(build_qubo(t, EncodingConfig{}).isApprox(q, 1e-15));
}

TEST(SvmQubo, EncodingCoversTheBox) {
  EncodingConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.cap(), 3.0);
  std::set<double> seen;
  for (std::uint64_t s = 0; s < 16; ++s) {
    const auto alphas = decode_alphas(bitstring_from_index(s, 4), cfg, 2);
    for (double v : alphas) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 3.0);
      seen.insert(v);
    }
  }
  EXPECT_EQ(seen, (std::set<double>{0, 1, 2, 3}));
  // least significant bit first within each sample
  EXPECT_EQ(decode_alphas(bitstring_from_string("1001"), cfg, 2), Eigen::Vector2d(1, 2));
}

TEST(SvmQubo, BiasUsesInteriorCoefficients) {
  TrainingSet t{Eigen::MatrixXd(2, 1), Eigen::VectorXd(2)};
  t.samples << 2, -1;
  t.labels << 1, -1;
  Kernel k;
  // alpha = (1, 1), both interior with weight 1*(3-1)=2 each
  // residual_i = y_i - sum_j alpha_j y_j x_j x_i: (1 - 6, -1 + 3) -> mean -1.5
  EXPECT_NEAR(compute_bias(Eigen::Vector2d(1, 1), t, k, 3.0), -1.5, 1e-12);
  // no interior alpha: average residual over alpha > 0
  EXPECT_NEAR(compute_bias(Eigen::Vector2d(3, 0), t, k, 3.0), 1.0 - 12.0, 1e-12);
  EXPECT_EQ(compute_bias(Eigen::Vector2d(0, 0), t, k, 3.0), 0.0);
}

TEST(SvmQubo, ModelPredictsSeparableTrainingSet) {
  TrainingSet t{Eigen::MatrixXd(4, 2), Eigen::VectorXd(4)};
  t.samples << 1, 1, 2, 1, -1, -1, -1, -2;
  t.labels << 1, 1, -1, -1;
  EncodingConfig cfg;
  cfg.kernel.scale = 0.25;  // at 0.5 the empty state ties for the minimum
  const auto q = build_qubo(t, cfg);
  const auto best = brute_force_solve(q).best;
  const auto model = model_from_state(best, t, cfg);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(predict(model, t.samples.row(i).transpose()), t.labels[i]);
}

TEST(SvmQubo, ZeroDecisionMapsToPositive) {
  SvmModel m;
  m.alphas = Eigen::VectorXd::Zero(2);
  m.support = {Eigen::MatrixXd::Zero(2, 1), Eigen::Vector2d(1, -1)};
  EXPECT_EQ(predict(m, Eigen::VectorXd::Zero(1)), 1);
  EXPECT_THROW(decision_value(m, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST(SvmQubo, RbfKernel) {
  Kernel k{KernelKind::rbf, 1.0, 0.5};
  EXPECT_NEAR(kernel_eval(k, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), std::exp(-1.0), 1e-15);
}

TEST(SvmQubo, ValidationRejectsBadInput) {
  TrainingSet one_class{Eigen::MatrixXd::Zero(2, 1), Eigen::Vector2d(1, 1)};
  EXPECT_THROW(build_qubo(one_class, EncodingConfig{}), std::invalid_argument);
  TrainingSet bad_label{Eigen::MatrixXd::Zero(2, 1), Eigen::Vector2d(1, 0)};
  EXPECT_THROW(validate(bad_label), std::invalid_argument);
  EncodingConfig cfg;
  cfg.bits_per_alpha = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(SvmQubo, JsonRoundTrip) {
  std::mt19937_64 rng(13);
  const auto t = random_set(3, 2, rng);
  EncodingConfig cfg;
  cfg.kernel.scale = 0.5;
  const auto m = model_from_state(bitstring_from_string("100110"), t, cfg);
  const auto back = svm_model_from_json(to_json(m));
  EXPECT_EQ(back.alphas, m.alphas);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.support.samples, m.support.samples);
  EXPECT_EQ(back.kernel.scale, 0.5);
  const auto e = encoding_from_json(to_json(cfg));
  EXPECT_EQ(e.bits_per_alpha, 2);
  EXPECT_EQ(e.kernel.scale, 0.5);
}
