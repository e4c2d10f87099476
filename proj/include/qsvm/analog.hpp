#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "qsvm/embedding.hpp"
#include "qsvm/qubo.hpp"

namespace qsvm {

/// A scalar control waveform over [0, duration].
struct Waveform {
  enum class Shape { constant, bell, ramp };
  Shape shape = Shape::constant;
  /// constant: the value; bell: the peak; ramp: the start value.
  double first = 0.0;
  /// ramp: the end value; unused otherwise.
  double second = 0.0;

  static Waveform constant(double value) { return {Shape::constant, value, 0.0}; }
  /// Raised-cosine window, peak * sin^2(pi t / duration).
  static Waveform bell(double peak) { return {Shape::bell, peak, 0.0}; }
  static Waveform ramp(double start, double end) { return {Shape::ramp, start, end}; }

  double at(double t, double duration) const;
};

/// Rabi frequency and detuning in rad/us over `duration` us.
struct PulseSchedule {
  double duration = 10.0;
  double dt = 1e-3;
  Waveform omega = Waveform::bell(0.0);
  Waveform delta = Waveform::ramp(-10.0, 10.0);

  double omega_at(double t) const { return omega.at(t, duration); }
  double delta_at(double t) const { return delta.at(t, duration); }
  long steps() const;
};

void validate(const PulseSchedule& schedule);

inline constexpr double kOmegaCap = 15.71;

struct ScheduleOptions {
  double tau = 10.0;
  double omega_cap = kOmegaCap;
  double delta_start = -10.0;
  double delta_end = 10.0;
  double dt = 1e-3;

  /// Shortened sequence used on hardware.
  static ScheduleOptions qpu() {
    ScheduleOptions o;
    o.tau = 4.0;
    return o;
  }
};

/// Median over all D^2 entries (mean of the middle pair for even counts).
double median_entry(const QuboMatrix& q);

/// Bell-shaped Rabi pulse peaking at min(median(Q), cap) with a linear
/// detuning ramp. A non-positive median falls back to the cap.
PulseSchedule build_schedule(const QuboMatrix& q, const ScheduleOptions& options = {});
PulseSchedule build_schedule(const QuboMatrix& q, double tau, double omega_cap, double dt);

struct QuantumState {
  int atoms = 0;
  /// Basis index with atom 0 as the most significant bit; bit value 1 is the
  /// Rydberg state.
  Eigen::VectorXcd amplitudes;
};

/// Surrogate noise model: readout bit flips plus per-run coherent jitter of
/// the drive amplitude and detuning.
struct NoiseConfig {
  bool spam_enabled = true;
  bool amplitude_jitter_enabled = true;
  bool detuning_jitter_enabled = true;
  double spam_eps = 0.03;        // P(read 0 | 1)
  double spam_eps_prime = 0.08;  // P(read 1 | 0)
  double amplitude_jitter_sigma = 0.02;
  double detuning_offset_sigma = 0.2;
  /// Independent jittered evolutions a shot budget is spread across.
  int realizations = 10;

  bool coherent() const {
    return (amplitude_jitter_enabled && amplitude_jitter_sigma > 0.0) ||
           (detuning_jitter_enabled && detuning_offset_sigma > 0.0);
  }
  bool spam() const { return spam_enabled && (spam_eps > 0.0 || spam_eps_prime > 0.0); }

  static NoiseConfig disabled() {
    NoiseConfig n;
    n.spam_enabled = n.amplitude_jitter_enabled = n.detuning_jitter_enabled = false;
    return n;
  }
};

void validate(const NoiseConfig& noise);

struct EvolveOptions {
  int max_atoms = 16;
  /// Checked before evolution when set.
  std::optional<HardwareConstraints> constraints = HardwareConstraints{};
  /// Called after every time step with the elapsed time.
  std::function<void(double, const Eigen::VectorXcd&)> observer;
};

/// Integrates the Rydberg Hamiltonian
///   H(t) = Omega(t)/2 sum_i X_i - delta(t) sum_i n_i + sum_{i<j} U_ij n_i n_j
/// (hbar = 1) from the all-ground state with a second-order split-operator
/// stepper: exact diagonal phases around exact single-atom drive rotations,
/// controls evaluated at step midpoints.
QuantumState evolve(const Register& reg, const PulseSchedule& schedule, double c6 = kDefaultC6,
                    const std::optional<NoiseConfig>& noise = std::nullopt, std::uint64_t seed = 0,
                    const EvolveOptions& options = {});

/// Dense H at fixed controls; intended for small registers and checks.
Eigen::MatrixXcd dense_hamiltonian(const Register& reg, double c6, double omega, double delta);

struct ShotHistogram {
  std::map<Bitstring, long> counts;
  long total_shots = 0;

  std::map<Bitstring, double> probabilities() const;
};

/// Draws shots from |amplitude|^2, then applies readout flips when enabled.
ShotHistogram sample(const QuantumState& state, long n_shots, const std::optional<NoiseConfig>& noise,
                     std::uint64_t seed);

/// Final states behind a shot budget: one ideal evolution, or one per noise
/// realisation. Sampling from the same set with different budgets keeps the
/// states fixed and changes only the histogram.
struct EvolvedRealizations {
  std::vector<QuantumState> states;
  std::optional<NoiseConfig> noise;
  std::uint64_t seed = 0;
};

EvolvedRealizations evolve_realizations(const Register& reg, const PulseSchedule& schedule, double c6,
                                        const std::optional<NoiseConfig>& noise, std::uint64_t seed,
                                        const EvolveOptions& options = {});
ShotHistogram sample_realizations(const EvolvedRealizations& evolved, long n_shots);

/// Evolves and samples. With coherent noise the shots are spread over
/// `noise.realizations` independently jittered evolutions.
ShotHistogram run_shots(const Register& reg, const PulseSchedule& schedule, double c6, long n_shots,
                        const std::optional<NoiseConfig>& noise, std::uint64_t seed, const EvolveOptions& options = {});

/// Modal bitstring, lexicographically smallest on ties.
Bitstring most_probable_state(const ShotHistogram& hist);

double ground_state_overlap(const QuantumState& state, const Bitstring& target);

/// The QUBO realised by a register at the end of a schedule (Omega = 0):
/// off-diagonals U_ij, diagonal -2 delta(duration). Its energy is twice the
/// classical final Hamiltonian energy, so the minimisers coincide.
QuboMatrix realized_qubo(const Register& reg, const PulseSchedule& schedule, double c6 = kDefaultC6);

nlohmann::json to_json(const PulseSchedule& schedule, int samples = 101);
PulseSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NoiseConfig& noise);
NoiseConfig noise_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ShotHistogram& hist);
ShotHistogram histogram_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuantumState& state);
QuantumState state_from_json(const nlohmann::json& j);

}  // namespace qsvm
