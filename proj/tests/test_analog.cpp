#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "qsvm/analog.hpp"

using namespace qsvm;

namespace {

Register atoms_on_line(int n, double spacing) {
  Register r;
  r.coords = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(n, 2);
  for (int i = 0; i < n; ++i) r.coords(i, 0) = spacing * i;
  return r;
}

PulseSchedule constant_drive(double omega, double delta, double duration, double dt = 1e-3) {
  PulseSchedule s;
  s.duration = duration;
  s.dt = dt;
  s.omega = Waveform::constant(omega);
  s.delta = Waveform::constant(delta);
  return s;
}

// exp(-i H t) |0...0> with the dense Hamiltonian, independent of the stepper
Eigen::VectorXcd exact_constant(const Register& reg, double omega, double delta, double t) {
  const Eigen::MatrixXcd h = dense_hamiltonian(reg, kDefaultC6, omega, delta);
  const Eigen::MatrixXcd u = (std::complex<double>(0, -t) * h).exp();
  return u.col(0);
}

EvolveOptions unchecked() {
  EvolveOptions o;
  o.constraints.reset();
  return o;
}

}  // namespace

TEST(Waveform, Shapes) {
  EXPECT_DOUBLE_EQ(Waveform::bell(4.0).at(5.0, 10.0), 4.0);
  EXPECT_NEAR(Waveform::bell(4.0).at(0.0, 10.0), 0.0, 1e-15);
  EXPECT_NEAR(Waveform::bell(4.0).at(10.0, 10.0), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(Waveform::ramp(-10, 10).at(0.0, 10.0), -10.0);
  EXPECT_DOUBLE_EQ(Waveform::ramp(-10, 10).at(10.0, 10.0), 10.0);
  EXPECT_DOUBLE_EQ(Waveform::ramp(-10, 10).at(2.5, 10.0), -5.0);
}

TEST(Schedule, PeakIsCappedMedian) {
  QuboMatrix q(2, 2);
  q << 1, 3, 3, 9;  // median of {1, 3, 3, 9} is 3
  EXPECT_DOUBLE_EQ(median_entry(q), 3.0);
  EXPECT_NEAR(build_schedule(q).omega.first, 3.0, 1e-9);
  EXPECT_NEAR(build_schedule(QuboMatrix::Constant(3, 3, 100.0)).omega.first, 15.71, 1e-9);
  // non-positive median has nothing to scale to
  EXPECT_NEAR(build_schedule(QuboMatrix::Constant(2, 2, -1.0)).omega.first, 15.71, 1e-9);
}

TEST(Schedule, DetuningEndpointsAndDurations) {
  const auto s = build_schedule(QuboMatrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(s.delta_at(0.0), -10.0);
  EXPECT_DOUBLE_EQ(s.delta_at(s.duration), 10.0);
  EXPECT_DOUBLE_EQ(s.duration, 10.0);
  EXPECT_DOUBLE_EQ(build_schedule(QuboMatrix::Identity(2, 2), ScheduleOptions::qpu()).duration, 4.0);
  EXPECT_EQ(s.steps(), 10000);
}

TEST(Schedule, ValidationAndJson) {
  PulseSchedule bad;
  bad.dt = 0.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  const auto s = build_schedule(QuboMatrix::Constant(2, 2, 2.0));
  const auto back = schedule_from_json(to_json(s));
  EXPECT_EQ(back.duration, s.duration);
  EXPECT_EQ(back.omega.first, s.omega.first);
  EXPECT_EQ(back.delta.second, s.delta.second);
}

TEST(Evolve, RabiOscillationMatchesClosedForm) {
  const double omega = 2.0 * std::numbers::pi;  // one period per microsecond
  double worst = 0.0;
  EvolveOptions opt;
  opt.observer = [&](double t, const Eigen::VectorXcd& psi) {
    const double expected = std::pow(std::sin(omega * t / 2.0), 2);
    worst = std::max(worst, std::abs(std::norm(psi[1]) - expected));
  };
  evolve(atoms_on_line(1, 0.0), constant_drive(omega, 0.0, 1.0), kDefaultC6, std::nullopt, 0, opt);
  EXPECT_LT(worst, 1e-4);
}

TEST(Evolve, ConstantDriveMatchesMatrixExponential) {
  for (int n = 1; n <= 4; ++n) {
    const auto reg = atoms_on_line(n, 7.5);
    const auto ref = exact_constant(reg, 4.0, 3.0, 1.5);
    const double coarse = (evolve(reg, constant_drive(4.0, 3.0, 1.5)).amplitudes - ref).norm();
    const double fine = (evolve(reg, constant_drive(4.0, 3.0, 1.5, 2.5e-4)).amplitudes - ref).norm();
    EXPECT_LT(coarse, 1e-4) << "atoms " << n;
    EXPECT_LT(fine, 1e-5) << "atoms " << n;
    // second order splitting: quartering dt cuts the error about 16x
    EXPECT_LT(fine, coarse / 10) << "atoms " << n;
  }
}

TEST(Evolve, BlockadeSuppressesDoubleExcitation) {
  // U / Omega well above 20 at 5 um
  const auto reg = atoms_on_line(2, 5.0);
  const double omega = 4.0;
  ASSERT_GE(interaction_matrix(reg)(0, 1) / omega, 20.0);
  double worst = 0.0;
  EvolveOptions opt;
  opt.observer = [&](double, const Eigen::VectorXcd& psi) { worst = std::max(worst, std::norm(psi[3])); };
  evolve(reg, constant_drive(omega, 0.0, 3.0), kDefaultC6, std::nullopt, 0, opt);
  EXPECT_LT(worst, 0.05);
  // independent check from the exact propagator at a few times
  for (double t : {0.4, 1.1, 2.9}) EXPECT_LT(std::norm(exact_constant(reg, omega, 0.0, t)[3]), 0.05);
}

TEST(Evolve, HamiltonianIsHermitian) {
  const auto h = dense_hamiltonian(atoms_on_line(3, 6.0), kDefaultC6, 2.5, -1.0);
  EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
}

TEST(Evolve, NormIsConserved) {
  Register reg = atoms_on_line(6, 6.0);
  reg.coords(5, 1) = 4.0;
  PulseSchedule s = build_schedule(QuboMatrix::Constant(6, 6, 8.0));
  s.duration = 2.0;
  const auto state = evolve(reg, s);
  EXPECT_NEAR(state.amplitudes.norm(), 1.0, 1e-10);
}

TEST(Evolve, ZeroDriveOnlyAddsPhases) {
  PulseSchedule s = constant_drive(0.0, 5.0, 1.0);
  const auto state = evolve(atoms_on_line(3, 6.0), s);
  EXPECT_NEAR(std::norm(state.amplitudes[0]), 1.0, 1e-14);
}

TEST(Evolve, HalvingTheStepBarelyMovesPopulations) {
  const auto reg = atoms_on_line(4, 6.5);
  PulseSchedule s = build_schedule(QuboMatrix::Constant(4, 4, 6.0));
  const Eigen::VectorXd a = evolve(reg, s).amplitudes.cwiseAbs2();
  s.dt /= 2;
  const Eigen::VectorXd b = evolve(reg, s).amplitudes.cwiseAbs2();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Evolve, SlowerSweepsReachTheGroundStateBetter) {
  // one atom swept from -10 to +10 ends in |1>
  double previous = -1.0;
  for (double tau : {0.5, 2.0, 8.0}) {
    PulseSchedule s;
    s.duration = tau;
    s.omega = Waveform::bell(4.0);
    const double p = ground_state_overlap(evolve(atoms_on_line(1, 0.0), s), Bitstring{1});
    EXPECT_GT(p, previous);
    previous = p;
  }
  EXPECT_GT(previous, 0.95);
}

TEST(Evolve, RejectsInvalidRegisterUnlessUnchecked) {
  const auto reg = atoms_on_line(2, 3.0);
  const auto s = constant_drive(1.0, 0.0, 0.01);
  EXPECT_THROW(evolve(reg, s), std::invalid_argument);
  EXPECT_NO_THROW(evolve(reg, s, kDefaultC6, std::nullopt, 0, unchecked()));
}

TEST(Sampling, FrequenciesWithinThreeSigma) {
  QuantumState st;
  st.atoms = 2;
  st.amplitudes = Eigen::VectorXcd::Zero(4);
  const double p[4] = {0.1, 0.2, 0.3, 0.4};
  for (int i = 0; i < 4; ++i) st.amplitudes[i] = std::sqrt(p[i]);
  const long n = 20000;
  const auto hist = sample(st, n, std::nullopt, 17);
  EXPECT_EQ(hist.total_shots, n);
  for (int i = 0; i < 4; ++i) {
    const auto it = hist.counts.find(bitstring_from_index(i, 2));
    const double count = it == hist.counts.end() ? 0.0 : static_cast<double>(it->second);
    EXPECT_NEAR(count, n * p[i], 3.0 * std::sqrt(n * p[i] * (1 - p[i])));
  }
}

TEST(Sampling, CertainReadoutFlips) {
  QuantumState st;
  st.atoms = 2;
  st.amplitudes = Eigen::VectorXcd::Zero(4);
  st.amplitudes[2] = 1.0;  // "10"
  NoiseConfig noise = NoiseConfig::disabled();
  noise.spam_enabled = true;
  noise.spam_eps = 1.0;
  noise.spam_eps_prime = 1.0;
  const auto hist = sample(st, 50, noise, 3);
  ASSERT_EQ(hist.counts.size(), 1u);
  EXPECT_EQ(to_string(hist.counts.begin()->first), "01");
}

TEST(Sampling, MostProbableBreaksTiesLexicographically) {
  ShotHistogram h;
  h.counts[bitstring_from_string("110")] = 5;
  h.counts[bitstring_from_string("011")] = 5;
  h.counts[bitstring_from_string("000")] = 2;
  h.total_shots = 12;
  EXPECT_EQ(to_string(most_probable_state(h)), "011");
  EXPECT_THROW(most_probable_state(ShotHistogram{}), std::invalid_argument);
}

TEST(Sampling, DisabledNoiseIsBitIdenticalToIdeal) {
  const auto reg = atoms_on_line(3, 7.0);
  const auto s = build_schedule(QuboMatrix::Constant(3, 3, 5.0));
  const auto ideal = run_shots(reg, s, kDefaultC6, 300, std::nullopt, 5);
  const auto off = run_shots(reg, s, kDefaultC6, 300, NoiseConfig::disabled(), 5);
  EXPECT_EQ(ideal.counts, off.counts);
}

TEST(Sampling, NoisyRunsSpreadShotsOverRealizations) {
  const auto reg = atoms_on_line(2, 7.0);
  const auto s = build_schedule(QuboMatrix::Constant(2, 2, 5.0));
  const auto evolved = evolve_realizations(reg, s, kDefaultC6, NoiseConfig{}, 9);
  EXPECT_EQ(evolved.states.size(), 10u);
  const auto hist = sample_realizations(evolved, 503);
  EXPECT_EQ(hist.total_shots, 503);
  long sum = 0;
  for (const auto& [bits, c] : hist.counts) sum += c;
  EXPECT_EQ(sum, 503);
  // same seed, same histogram
  EXPECT_EQ(run_shots(reg, s, kDefaultC6, 503, NoiseConfig{}, 9).counts, hist.counts);
}

TEST(RealizedQubo, DiagonalFromFinalDetuning) {
  const auto reg = atoms_on_line(3, 8.0);
  const auto s = build_schedule(QuboMatrix::Constant(3, 3, 5.0));
  const auto q = realized_qubo(reg, s);
  EXPECT_DOUBLE_EQ(q(1, 1), -20.0);
  EXPECT_NEAR(q(0, 2), kDefaultC6 / std::pow(16.0, 6), 1e-12);
  // aQa equals twice the classical final energy
  const auto h = dense_hamiltonian(reg, kDefaultC6, 0.0, 10.0);
  for (std::uint64_t i = 0; i < 8; ++i) EXPECT_NEAR(energy(q, bitstring_from_index(i, 3)), 2.0 * h(i, i).real(), 1e-9);
}

TEST(AnalogJson, RoundTrips) {
  NoiseConfig n;
  n.realizations = 4;
  EXPECT_EQ(noise_from_json(to_json(n)).realizations, 4);
  ShotHistogram h;
  h.counts[bitstring_from_string("01")] = 3;
  h.total_shots = 3;
  EXPECT_EQ(histogram_from_json(to_json(h)).counts, h.counts);
  const auto st = evolve(atoms_on_line(2, 7.0), constant_drive(3.0, 1.0, 0.2));
  EXPECT_LT((state_from_json(to_json(st)).amplitudes - st.amplitudes).norm(), 1e-15);
}
