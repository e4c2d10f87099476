#include "qsvm/backend.hpp"

#include <stdexcept>

namespace qsvm {
namespace {

constexpr std::pair<BackendKind, const char*> kBackendNames[] = {
    {BackendKind::brute_force, "brute_force"},
    {BackendKind::simulated_anneal, "simulated_anneal"},
    {BackendKind::analog_ideal, "analog_ideal"},
    {BackendKind::analog_noisy, "analog_noisy"},
};

EvolveOptions device_options(int max_atoms) {
  EvolveOptions o;
  o.max_atoms = max_atoms;
  return o;
}

ShotHistogram spectrum_histogram(const QuboMatrix& q, int spectrum_size) {
  const auto result = brute_force_solve(q, static_cast<std::size_t>(spectrum_size));
  ShotHistogram hist;
  const long n = static_cast<long>(result.ranked.size());
  for (long r = 0; r < n; ++r) {
    hist.counts[result.ranked[r].bits] = n - r;
    hist.total_shots += n - r;
  }
  return hist;
}

ShotHistogram anneal_histogram(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed) {
  ShotHistogram hist;
  for (long s = 0; s < cfg.shots; ++s) {
    const auto r = simulated_anneal(q, cfg.anneal_sweeps, AnnealSchedule{}, derive_seed(seed, static_cast<std::uint64_t>(s)));
    ++hist.counts[r.best];
    ++hist.total_shots;
  }
  return hist;
}

nlohmann::json schedule_options_to_json(const ScheduleOptions& o) {
  return {{"tau", o.tau}, {"dt", o.dt}, {"omega_cap", o.omega_cap}, {"delta_start", o.delta_start}, {"delta_end", o.delta_end}};
}

ScheduleOptions schedule_options_from_json(const nlohmann::json& j) {
  ScheduleOptions o = j.value("qpu_mode", false) ? ScheduleOptions::qpu() : ScheduleOptions{};
  o.tau = j.value("tau", o.tau);
  o.dt = j.value("dt", o.dt);
  o.omega_cap = j.value("omega_cap", o.omega_cap);
  o.delta_start = j.value("delta_start", o.delta_start);
  o.delta_end = j.value("delta_end", o.delta_end);
  if (!(o.tau > 0.0) || !(o.dt > 0.0) || !(o.omega_cap > 0.0)) {
    throw std::invalid_argument("schedule: tau, dt and omega_cap must be positive");
  }
  return o;
}

}  // namespace

DeviceSettings device_settings(const BackendConfig& cfg) {
  DeviceSettings d;
  d.c6 = cfg.embedding.c6;
  if (cfg.kind == BackendKind::analog_noisy) d.noise = cfg.noise;
  d.max_atoms = cfg.max_atoms;
  return d;
}

std::string to_string(BackendKind kind) {
  for (const auto& [k, name] : kBackendNames)
    if (k == kind) return name;
  return "unknown";
}

BackendKind backend_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kBackendNames)
    if (name == n) return k;
  throw std::invalid_argument("unknown backend '" + name +
                              "' (expected brute_force, simulated_anneal, analog_ideal or analog_noisy)");
}

void validate(const BackendConfig& cfg) {
  if (cfg.shots < 1) throw std::invalid_argument("backend: shots must be at least 1");
  if (cfg.spectrum_size < 1) throw std::invalid_argument("backend: spectrum_size must be at least 1");
  if (cfg.anneal_sweeps < 1) throw std::invalid_argument("backend: anneal sweeps must be at least 1");
  validate(cfg.noise);
  validate(cfg.constraints);
}

nlohmann::json to_json(const AnalogPayload& p) {
  return {{"register", to_json(p.reg)}, {"schedule", to_json(p.schedule)}};
}

AnalogPayload payload_from_json(const nlohmann::json& j) {
  AnalogPayload p;
  p.reg = register_from_json(j.at("register"));
  p.schedule = schedule_from_json(j.at("schedule"));
  return p;
}

AnalogPayload prepare_payload(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed,
                              EmbeddingReport* report) {
  if (q.rows() > cfg.max_atoms) {
    throw std::invalid_argument("analog backend: " + std::to_string(q.rows()) + " atoms exceed the simulator bound of " +
                                std::to_string(cfg.max_atoms));
  }
  auto embedded = embed(q, cfg.constraints, cfg.embedding, seed);
  AnalogPayload p;
  p.reg = embedded.reg;
  p.schedule = build_schedule(QuboMatrix(cfg.embedding.target_scale * q), cfg.schedule);
  if (report) *report = std::move(embedded);
  return p;
}

ShotHistogram execute_payload(const AnalogPayload& payload, const DeviceSettings& device, long shots,
                              std::uint64_t seed) {
  return run_shots(payload.reg, payload.schedule, device.c6, shots, device.noise, seed,
                   device_options(device.max_atoms));
}

TrainingRun solve_qubo(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  TrainingRun run;
  switch (cfg.kind) {
    case BackendKind::brute_force:
      run.histogram = spectrum_histogram(q, cfg.spectrum_size);
      break;
    case BackendKind::simulated_anneal:
      run.histogram = anneal_histogram(q, cfg, seed);
      break;
    case BackendKind::analog_ideal:
    case BackendKind::analog_noisy: {
      EmbeddingReport report;
      auto payload = prepare_payload(q, cfg, derive_seed(seed, 0), &report);
      run.histogram = execute_payload(payload, device_settings(cfg), cfg.shots, derive_seed(seed, 1));
      run.payload = std::move(payload);
      run.embedding = std::move(report);
      break;
    }
  }
  return run;
}

AnalogSession::AnalogSession(const QuboMatrix& q, const BackendConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  if (!is_analog(cfg.kind)) throw std::invalid_argument("AnalogSession needs an analog backend");
  payload_ = prepare_payload(q, cfg, derive_seed(seed, 0), &report_);
  const auto device = device_settings(cfg);
  evolved_ = evolve_realizations(payload_.reg, payload_.schedule, device.c6, device.noise, derive_seed(seed, 1),
                                 device_options(device.max_atoms));
}

TrainingRun AnalogSession::run(long shots) const {
  TrainingRun r;
  r.histogram = sample_realizations(evolved_, shots);
  r.payload = payload_;
  r.embedding = report_;
  return r;
}

nlohmann::json to_json(const BackendConfig& cfg) {
  auto embedding = nlohmann::json{{"c6", cfg.embedding.c6},
                                  {"target_scale", cfg.embedding.target_scale},
                                  {"restarts", cfg.embedding.restarts},
                                  {"penalty_weight", cfg.embedding.penalty_weight},
                                  {"rho_begin", cfg.embedding.optimizer.rho_begin},
                                  {"rho_end", cfg.embedding.optimizer.rho_end},
                                  {"max_evaluations", cfg.embedding.optimizer.max_evaluations},
                                  {"constraints", to_json(cfg.constraints)}};
  return {{"kind", to_string(cfg.kind)},
          {"shots", cfg.shots},
          {"spectrum_size", cfg.spectrum_size},
          {"anneal_sweeps", cfg.anneal_sweeps},
          {"max_atoms", cfg.max_atoms},
          {"schedule", schedule_options_to_json(cfg.schedule)},
          {"noise", to_json(cfg.noise)},
          {"embedding", embedding}};
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
  BackendConfig cfg;
  if (j.contains("kind")) cfg.kind = backend_kind_from_string(j.at("kind").get<std::string>());
  cfg.shots = j.value("shots", cfg.shots);
  cfg.spectrum_size = j.value("spectrum_size", cfg.spectrum_size);
  cfg.anneal_sweeps = j.value("anneal_sweeps", cfg.anneal_sweeps);
  cfg.max_atoms = j.value("max_atoms", cfg.max_atoms);
  if (j.contains("schedule")) cfg.schedule = schedule_options_from_json(j.at("schedule"));
  if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
  if (j.contains("embedding")) {
    const auto& e = j.at("embedding");
    cfg.embedding.c6 = e.value("c6", cfg.embedding.c6);
    cfg.embedding.target_scale = e.value("target_scale", cfg.embedding.target_scale);
    cfg.embedding.restarts = e.value("restarts", cfg.embedding.restarts);
    cfg.embedding.penalty_weight = e.value("penalty_weight", cfg.embedding.penalty_weight);
    cfg.embedding.optimizer.rho_begin = e.value("rho_begin", cfg.embedding.optimizer.rho_begin);
    cfg.embedding.optimizer.rho_end = e.value("rho_end", cfg.embedding.optimizer.rho_end);
    cfg.embedding.optimizer.max_evaluations = e.value("max_evaluations", cfg.embedding.optimizer.max_evaluations);
    if (e.contains("constraints")) cfg.constraints = constraints_from_json(e.at("constraints"));
  }
  validate(cfg);
  return cfg;
}

}  // namespace qsvm
