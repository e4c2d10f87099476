#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "qsvm/backend.hpp"
#include "qsvm/svm_qubo.hpp"

using namespace qsvm;

namespace {

TrainingSet small_set() {
  TrainingSet t{Eigen::MatrixXd(3, 2), Eigen::VectorXd(3)};
  t.samples << 0.3125, -1.71875, 2.40625, 0.15625, -0.90625, 1.28125;
  t.labels << 1, -1, 1;
  return t;
}

// every number anywhere inside a JSON document
void collect_numbers(const nlohmann::json& j, std::vector<double>& out) {
  if (j.is_number()) out.push_back(j.get<double>());
  else if (j.is_structured())
    for (const auto& v : j) collect_numbers(v, out);
}

}  // namespace

TEST(Backend, KindNames) {
  for (auto k : {BackendKind::brute_force, BackendKind::simulated_anneal, BackendKind::analog_ideal,
                 BackendKind::analog_noisy})
    EXPECT_EQ(backend_kind_from_string(to_string(k)), k);
  EXPECT_THROW(backend_kind_from_string("qpu"), std::invalid_argument);
}

TEST(Backend, BruteForceHistogramRanksByEnergy) {
  QuboMatrix q(2, 2);
  q << -2, 1, 1, -1;  // 10: -2, 11: -1, 01: -1, 00: 0
  BackendConfig cfg;
  cfg.spectrum_size = 3;
  const auto run = solve_qubo(q, cfg, 0);
  EXPECT_EQ(run.histogram.counts.at(bitstring_from_string("10")), 3);
  EXPECT_EQ(run.histogram.counts.at(bitstring_from_string("01")), 2);
  EXPECT_EQ(run.histogram.counts.at(bitstring_from_string("11")), 1);
  EXPECT_FALSE(run.payload.has_value());
}

TEST(Backend, AnnealHistogramCountsRestarts) {
  QuboMatrix q(2, 2);
  q << -2, 1, 1, -1;
  BackendConfig cfg;
  cfg.kind = BackendKind::simulated_anneal;
  cfg.shots = 25;
  const auto run = solve_qubo(q, cfg, 4);
  EXPECT_EQ(run.histogram.total_shots, 25);
  EXPECT_EQ(most_probable_state(run.histogram), bitstring_from_string("10"));
}

TEST(Backend, PayloadCarriesNoTrainingData) {
  const auto train = small_set();
  EncodingConfig enc;
  const auto q = build_qubo(train, enc);
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_ideal;
  cfg.shots = 50;
  const auto payload = prepare_payload(q, cfg, 3);
  const auto j = to_json(payload);

  std::set<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.insert(k);
  EXPECT_EQ(keys, (std::set<std::string>{"register", "schedule"}));

  std::vector<double> numbers;
  collect_numbers(j, numbers);
  std::vector<double> forbidden;
  for (Eigen::Index i = 0; i < train.samples.size(); ++i) forbidden.push_back(train.samples.data()[i]);
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (q.data()[i] != 0.0) forbidden.push_back(q.data()[i]);
  for (double f : forbidden)
    for (double x : numbers) EXPECT_NE(x, f) << "payload leaks " << f;

  // the device runs from the payload alone
  const auto hist = execute_payload(payload_from_json(j), device_settings(cfg), 50, 1);
  EXPECT_EQ(hist.total_shots, 50);
}

TEST(Backend, DeviceSettingsOnlyCarryNoiseForNoisyBackend) {
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_ideal;
  EXPECT_FALSE(device_settings(cfg).noise.has_value());
  cfg.kind = BackendKind::analog_noisy;
  EXPECT_TRUE(device_settings(cfg).noise.has_value());
}

TEST(Backend, ScheduleFollowsScaledQubo) {
  QuboMatrix q = QuboMatrix::Constant(2, 2, 0.25);
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_ideal;
  cfg.embedding.target_scale = 8.0;
  EXPECT_NEAR(prepare_payload(q, cfg, 0).schedule.omega.first, 2.0, 1e-12);
}

TEST(Backend, SessionMatchesSolve) {
  const auto q = build_qubo(small_set(), EncodingConfig{});
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_noisy;
  cfg.shots = 120;
  const AnalogSession session(q, cfg, 11);
  EXPECT_EQ(session.run(120).histogram.counts, solve_qubo(q, cfg, 11).histogram.counts);
  EXPECT_EQ(session.run(40).histogram.total_shots, 40);
}

TEST(Backend, RefusesOversizedAnalogProblems) {
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_ideal;
  cfg.max_atoms = 4;
  EXPECT_THROW(solve_qubo(QuboMatrix::Identity(6, 6), cfg, 0), std::invalid_argument);
}

TEST(Backend, ConfigJsonRoundTrip) {
  BackendConfig cfg;
  cfg.kind = BackendKind::analog_noisy;
  cfg.shots = 77;
  cfg.noise.realizations = 3;
  cfg.embedding.target_scale = 4.0;
  const auto back = backend_config_from_json(to_json(cfg));
  EXPECT_EQ(back.kind, cfg.kind);
  EXPECT_EQ(back.shots, 77);
  EXPECT_EQ(back.noise.realizations, 3);
  EXPECT_EQ(back.embedding.target_scale, 4.0);
  cfg.shots = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}
