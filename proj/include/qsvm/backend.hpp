#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "qsvm/analog.hpp"
#include "qsvm/embedding.hpp"
#include "qsvm/qubo.hpp"

namespace qsvm {

enum class BackendKind { brute_force, simulated_anneal, analog_ideal, analog_noisy };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& name);
inline bool is_analog(BackendKind kind) { return kind == BackendKind::analog_ideal || kind == BackendKind::analog_noisy; }

/// Factor applied to the QUBO before it goes to the device. SVM QUBO
/// entries are O(1) while the detuning ramp ends at 10 rad/us, so unscaled
/// couplings are swamped by the uniform field the register cannot address.
/// 5 gave the best mean ideal-vs-exact agreement over held-out splits.
inline constexpr double kDefaultCouplingScale = 5.0;

struct BackendConfig {
  BackendKind kind = BackendKind::brute_force;
  long shots = 1000;
  /// Classical backends: brute force lists this many lowest states; the
  /// annealer is restarted `shots` times.
  int spectrum_size = 32;
  int anneal_sweeps = 200;
  ScheduleOptions schedule;
  NoiseConfig noise;
  HardwareConstraints constraints;
  EmbedOptions embedding{kDefaultC6, kDefaultCouplingScale};
  int max_atoms = 16;
};

void validate(const BackendConfig& cfg);

/// Everything an analog device receives: atom positions and the pulse
/// sequence. No training data, labels or QUBO entries cross this boundary.
struct AnalogPayload {
  Register reg;
  PulseSchedule schedule;
};

/// Properties of the (simulated) device itself, never part of a payload.
struct DeviceSettings {
  double c6 = kDefaultC6;
  std::optional<NoiseConfig> noise;
  int max_atoms = 16;
};

DeviceSettings device_settings(const BackendConfig& cfg);

nlohmann::json to_json(const AnalogPayload& payload);
AnalogPayload payload_from_json(const nlohmann::json& j);

/// Embeds the QUBO and derives the schedule from it (client side). The
/// schedule sees the QUBO after the embedding's target scale.
AnalogPayload prepare_payload(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed,
                              EmbeddingReport* report = nullptr);

/// Device side: evolves the register under the schedule and samples shots.
/// Only the payload and device settings are visible here.
ShotHistogram execute_payload(const AnalogPayload& payload, const DeviceSettings& device, long shots,
                              std::uint64_t seed);

struct TrainingRun {
  ShotHistogram histogram;
  std::optional<AnalogPayload> payload;
  std::optional<EmbeddingReport> embedding;
};

/// Solves a QUBO with the configured backend and returns a histogram of
/// candidate states.
///
/// Brute force reports the lowest `spectrum_size` states with descending
/// pseudo-counts (spectrum_size - rank), so ranking by frequency is ranking by
/// energy. The annealer contributes one state per restart.
TrainingRun solve_qubo(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed);

/// Same as solve_qubo but keeps the evolved states so several shot budgets can
/// be drawn from one evolution (analog backends only).
class AnalogSession {
 public:
  AnalogSession(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed);

  TrainingRun run(long shots) const;
  const AnalogPayload& payload() const { return payload_; }
  const EmbeddingReport& embedding() const { return report_; }
  const EvolvedRealizations& evolved() const { return evolved_; }

 private:
  AnalogPayload payload_;
  EmbeddingReport report_;
  EvolvedRealizations evolved_;
};

nlohmann::json to_json(const BackendConfig& cfg);
BackendConfig backend_config_from_json(const nlohmann::json& j);

}  // namespace qsvm
