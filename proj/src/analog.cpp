#include "qsvm/analog.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qsvm {
namespace {

using cd = std::complex<double>;

Waveform::Shape shape_from_name(const std::string& name) {
  if (name == "constant") return Waveform::Shape::constant;
  if (name == "bell") return Waveform::Shape::bell;
  if (name == "ramp") return Waveform::Shape::ramp;
  throw std::invalid_argument("unknown waveform shape: " + name);
}

nlohmann::json to_json(const Waveform& w) {
  switch (w.shape) {
    case Waveform::Shape::constant: return {{"shape", "constant"}, {"value", w.first}};
    case Waveform::Shape::bell: return {{"shape", "bell"}, {"peak", w.first}};
    case Waveform::Shape::ramp: return {{"shape", "ramp"}, {"start", w.first}, {"end", w.second}};
  }
  return {};
}

Waveform waveform_from_json(const nlohmann::json& j) {
  Waveform w;
  w.shape = shape_from_name(j.at("shape").get<std::string>());
  switch (w.shape) {
    case Waveform::Shape::constant: w.first = j.at("value").get<double>(); break;
    case Waveform::Shape::bell: w.first = j.at("peak").get<double>(); break;
    case Waveform::Shape::ramp:
      w.first = j.at("start").get<double>();
      w.second = j.at("end").get<double>();
      break;
  }
  return w;
}

// Per-register diagonal data shared by every step.
struct DiagonalTables {
  std::vector<int> excitations;
  std::vector<double> interaction;
};

DiagonalTables diagonal_tables(const Eigen::MatrixXd& u, int n) {
  const std::size_t dim = std::size_t{1} << n;
  DiagonalTables t{std::vector<int>(dim), std::vector<double>(dim, 0.0)};
  for (std::size_t idx = 0; idx < dim; ++idx) {
    t.excitations[idx] = std::popcount(idx);
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!((idx >> (n - 1 - i)) & 1u)) continue;
      for (int j = i + 1; j < n; ++j) {
        if ((idx >> (n - 1 - j)) & 1u) e += u(i, j);
      }
    }
    t.interaction[idx] = e;
  }
  return t;
}

}  // namespace

double Waveform::at(double t, double duration) const {
  switch (shape) {
    case Shape::constant: return first;
    case Shape::bell: {
      const double s = std::sin(M_PI * t / duration);
      return first * s * s;
    }
    case Shape::ramp: return first + (second - first) * (t / duration);
  }
  return 0.0;
}

long PulseSchedule::steps() const { return std::lround(duration / dt); }

void validate(const PulseSchedule& s) {
  if (!(s.duration > 0.0)) throw std::invalid_argument("pulse duration must be > 0");
  if (!(s.dt > 0.0) || s.dt > s.duration) throw std::invalid_argument("time step must be in (0, duration]");
  const double ratio = s.duration / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw std::invalid_argument("time step must divide the pulse duration");
  }
}

double median_entry(const QuboMatrix& q) {
  check_qubo(q);
  std::vector<double> v(q.data(), q.data() + q.size());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

PulseSchedule build_schedule(const QuboMatrix& q, const ScheduleOptions& o) {
  if (!(o.omega_cap > 0.0)) throw std::invalid_argument("omega cap must be > 0");
  const double med = median_entry(q);
  PulseSchedule s;
  s.duration = o.tau;
  s.dt = o.dt;
  s.omega = Waveform::bell(med > 0.0 && med < o.omega_cap ? med : o.omega_cap);
  s.delta = Waveform::ramp(o.delta_start, o.delta_end);
  validate(s);
  return s;
}

PulseSchedule build_schedule(const QuboMatrix& q, double tau, double omega_cap, double dt) {
  ScheduleOptions o;
  o.tau = tau;
  o.omega_cap = omega_cap;
  o.dt = dt;
  return build_schedule(q, o);
}

void validate(const NoiseConfig& n) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(n.spam_eps) || !prob(n.spam_eps_prime)) throw std::invalid_argument("SPAM probabilities must be in [0, 1]");
  if (!(n.amplitude_jitter_sigma >= 0.0) || !(n.detuning_offset_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigmas must be >= 0");
  }
  if (n.realizations < 1) throw std::invalid_argument("noise realizations must be >= 1");
}

QuantumState evolve(const Register& reg, const PulseSchedule& schedule, double c6, const std::optional<NoiseConfig>& noise,
                    std::uint64_t seed, const EvolveOptions& options) {
  validate(schedule);
  const int n = static_cast<int>(reg.size());
  if (n < 1) throw std::invalid_argument("evolve: empty register");
  if (n > options.max_atoms) {
    throw std::invalid_argument("evolve: " + std::to_string(n) + " atoms exceeds the state-vector bound of " +
                                std::to_string(options.max_atoms));
  }
  if (options.constraints) {
    const auto violations = validate(reg, *options.constraints);
    if (!violations.empty()) throw std::invalid_argument("evolve: register fails validation: " + describe(violations.front()));
  }

  double amplitude_factor = 1.0;
  double detuning_offset = 0.0;
  if (noise) {
    validate(*noise);
    if (noise->coherent()) {
      std::mt19937_64 rng(derive_seed(seed, 0));
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double ga = gauss(rng);
      const double gd = gauss(rng);
      if (noise->amplitude_jitter_enabled) amplitude_factor += noise->amplitude_jitter_sigma * ga;
      if (noise->detuning_jitter_enabled) detuning_offset += noise->detuning_offset_sigma * gd;
    }
  }

  const auto tables = diagonal_tables(interaction_matrix(reg, c6), n);
  const std::size_t dim = std::size_t{1} << n;
  const double dt = schedule.dt;
  const long steps = schedule.steps();

  std::vector<cd> half_interaction(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) half_interaction[idx] = std::polar(1.0, -0.5 * dt * tables.interaction[idx]);

  QuantumState state;
  state.atoms = n;
  state.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  state.amplitudes[0] = 1.0;
  cd* psi = state.amplitudes.data();
  std::vector<cd> detuning_phase(n + 1);

  auto apply_diagonal = [&] {
    for (std::size_t idx = 0; idx < dim; ++idx) psi[idx] *= half_interaction[idx] * detuning_phase[tables.excitations[idx]];
  };

  for (long k = 0; k < steps; ++k) {
    const double t_mid = (static_cast<double>(k) + 0.5) * dt;
    const double omega = amplitude_factor * schedule.omega_at(t_mid);
    const double delta = schedule.delta_at(t_mid) + detuning_offset;

    // exp(+i delta m dt/2) for m excitations.
    for (int m = 0; m <= n; ++m) detuning_phase[m] = std::polar(1.0, 0.5 * dt * delta * m);

    apply_diagonal();
    if (omega != 0.0) {
      const double theta = 0.5 * omega * dt;
      const double c = std::cos(theta);
      const cd mis(0.0, -std::sin(theta));
      for (int q = 0; q < n; ++q) {
        const std::size_t mask = std::size_t{1} << q;
        for (std::size_t block = 0; block < dim; block += 2 * mask) {
          for (std::size_t i = block; i < block + mask; ++i) {
            const cd a0 = psi[i];
            const cd a1 = psi[i | mask];
            psi[i] = c * a0 + mis * a1;
            psi[i | mask] = mis * a0 + c * a1;
          }
        }
      }
    }
    apply_diagonal();

    if (options.observer) options.observer(static_cast<double>(k + 1) * dt, state.amplitudes);
  }
  return state;
}

Eigen::MatrixXcd dense_hamiltonian(const Register& reg, double c6, double omega, double delta) {
  const int n = static_cast<int>(reg.size());
  if (n > 12) throw std::invalid_argument("dense_hamiltonian: register too large for a dense matrix");
  const auto tables = diagonal_tables(interaction_matrix(reg, c6), n);
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    h(idx, idx) = -delta * tables.excitations[idx] + tables.interaction[idx];
    for (int q = 0; q < n; ++q) h(idx ^ (std::size_t{1} << q), idx) += 0.5 * omega;
  }
  return h;
}

std::map<Bitstring, double> ShotHistogram::probabilities() const {
  std::map<Bitstring, double> p;
  if (total_shots <= 0) return p;
  for (const auto& [bits, count] : counts) p[bits] = static_cast<double>(count) / static_cast<double>(total_shots);
  return p;
}

ShotHistogram sample(const QuantumState& state, long n_shots, const std::optional<NoiseConfig>& noise,
                     std::uint64_t seed) {
  if (n_shots < 0) throw std::invalid_argument("sample: negative shot count");
  const auto dim = state.amplitudes.size();
  if (dim != (Eigen::Index{1} << state.atoms)) throw std::invalid_argument("sample: state size does not match atom count");
  std::vector<double> cumulative(dim);
  double running = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    running += std::norm(state.amplitudes[i]);
    cumulative[i] = running;
  }
  if (!(running > 0.0)) throw std::invalid_argument("sample: state has zero norm");

  const bool flips = noise && (validate(*noise), noise->spam());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ShotHistogram hist;
  hist.total_shots = n_shots;
  for (long s = 0; s < n_shots; ++s) {
    const double u = unit(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    Bitstring bits = bitstring_from_index(static_cast<std::uint64_t>(it - cumulative.begin()),
                                          static_cast<std::size_t>(state.atoms));
    if (flips) {
      for (auto& b : bits) {
        const double r = unit(rng);
        if (b && r < noise->spam_eps) b = 0;
        else if (!b && r < noise->spam_eps_prime) b = 1;
      }
    }
    ++hist.counts[bits];
  }
  return hist;
}

EvolvedRealizations evolve_realizations(const Register& reg, const PulseSchedule& schedule, double c6,
                                        const std::optional<NoiseConfig>& noise, std::uint64_t seed,
                                        const EvolveOptions& options) {
  EvolvedRealizations out;
  out.noise = noise;
  out.seed = seed;
  if (!noise || !noise->coherent()) {
    out.states.push_back(evolve(reg, schedule, c6, noise, derive_seed(seed, 0), options));
    return out;
  }
  if (noise->realizations < 1) throw std::invalid_argument("noise: realizations must be at least 1");
  for (int r = 0; r < noise->realizations; ++r) {
    out.states.push_back(evolve(reg, schedule, c6, noise, derive_seed(seed, 2 * static_cast<std::uint64_t>(r)), options));
  }
  return out;
}

ShotHistogram sample_realizations(const EvolvedRealizations& evolved, long n_shots) {
  if (n_shots < 1) throw std::invalid_argument("run_shots: need at least one shot");
  if (evolved.states.empty()) throw std::invalid_argument("sample_realizations: no evolved states");
  if (evolved.states.size() == 1 && !(evolved.noise && evolved.noise->coherent())) {
    return sample(evolved.states.front(), n_shots, evolved.noise, derive_seed(evolved.seed, 1));
  }
  const long runs = std::min<long>(static_cast<long>(evolved.states.size()), n_shots);
  ShotHistogram merged;
  for (long r = 0; r < runs; ++r) {
    const long shots = n_shots / runs + (r < n_shots % runs ? 1 : 0);
    const auto part = sample(evolved.states[r], shots, evolved.noise, derive_seed(evolved.seed, 2 * r + 1));
    for (const auto& [bits, count] : part.counts) merged.counts[bits] += count;
    merged.total_shots += part.total_shots;
  }
  return merged;
}

ShotHistogram run_shots(const Register& reg, const PulseSchedule& schedule, double c6, long n_shots,
                        const std::optional<NoiseConfig>& noise, std::uint64_t seed, const EvolveOptions& options) {
  if (n_shots < 1) throw std::invalid_argument("run_shots: need at least one shot");
  return sample_realizations(evolve_realizations(reg, schedule, c6, noise, seed, options), n_shots);
}

Bitstring most_probable_state(const ShotHistogram& hist) {
  if (hist.total_shots < 1 || hist.counts.empty()) throw std::invalid_argument("most_probable_state: empty histogram");
  const Bitstring* best = nullptr;
  long best_count = -1;
  for (const auto& [bits, count] : hist.counts) {
    if (count > best_count) {
      best = &bits;
      best_count = count;
    }
  }
  return *best;
}

double ground_state_overlap(const QuantumState& state, const Bitstring& target) {
  if (static_cast<int>(target.size()) != state.atoms) {
    throw std::invalid_argument("ground_state_overlap: target length does not match atom count");
  }
  return std::norm(state.amplitudes[static_cast<Eigen::Index>(to_index(target))]);
}

QuboMatrix realized_qubo(const Register& reg, const PulseSchedule& schedule, double c6) {
  QuboMatrix q = interaction_matrix(reg, c6);
  q.diagonal().setConstant(-2.0 * schedule.delta_at(schedule.duration));
  return q;
}

nlohmann::json to_json(const PulseSchedule& s, int samples) {
  nlohmann::json points = nlohmann::json::array();
  samples = std::max(samples, 2);
  for (int i = 0; i < samples; ++i) {
    const double t = s.duration * static_cast<double>(i) / (samples - 1);
    points.push_back({t, s.omega_at(t), s.delta_at(t)});
  }
  return {{"duration_us", s.duration},
          {"dt_us", s.dt},
          {"omega", to_json(s.omega)},
          {"delta", to_json(s.delta)},
          {"samples_t_omega_delta", points}};
}

PulseSchedule schedule_from_json(const nlohmann::json& j) {
  PulseSchedule s;
  s.duration = j.at("duration_us").get<double>();
  s.dt = j.at("dt_us").get<double>();
  s.omega = waveform_from_json(j.at("omega"));
  s.delta = waveform_from_json(j.at("delta"));
  validate(s);
  return s;
}

nlohmann::json to_json(const NoiseConfig& n) {
  return {{"spam_enabled", n.spam_enabled},
          {"amplitude_jitter_enabled", n.amplitude_jitter_enabled},
          {"detuning_jitter_enabled", n.detuning_jitter_enabled},
          {"spam_eps", n.spam_eps},
          {"spam_eps_prime", n.spam_eps_prime},
          {"amplitude_jitter_sigma", n.amplitude_jitter_sigma},
          {"detuning_offset_sigma", n.detuning_offset_sigma},
          {"realizations", n.realizations}};
}

NoiseConfig noise_from_json(const nlohmann::json& j) {
  NoiseConfig n;
  n.spam_enabled = j.value("spam_enabled", n.spam_enabled);
  n.amplitude_jitter_enabled = j.value("amplitude_jitter_enabled", n.amplitude_jitter_enabled);
  n.detuning_jitter_enabled = j.value("detuning_jitter_enabled", n.detuning_jitter_enabled);
  n.spam_eps = j.value("spam_eps", n.spam_eps);
  n.spam_eps_prime = j.value("spam_eps_prime", n.spam_eps_prime);
  n.amplitude_jitter_sigma = j.value("amplitude_jitter_sigma", n.amplitude_jitter_sigma);
  n.detuning_offset_sigma = j.value("detuning_offset_sigma", n.detuning_offset_sigma);
  n.realizations = j.value("realizations", n.realizations);
  validate(n);
  return n;
}

nlohmann::json to_json(const ShotHistogram& hist) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [bits, count] : hist.counts) counts[to_string(bits)] = count;
  return {{"total_shots", hist.total_shots}, {"counts", counts}};
}

ShotHistogram histogram_from_json(const nlohmann::json& j) {
  ShotHistogram h;
  h.total_shots = j.at("total_shots").get<long>();
  long sum = 0;
  for (const auto& [key, value] : j.at("counts").items()) {
    const long c = value.get<long>();
    if (c < 0) throw std::invalid_argument("histogram JSON: negative count");
    h.counts[bitstring_from_string(key)] = c;
    sum += c;
  }
  if (sum != h.total_shots) throw std::invalid_argument("histogram JSON: counts do not sum to total_shots");
  return h;
}

nlohmann::json to_json(const QuantumState& state) {
  std::vector<double> re(state.amplitudes.size()), im(state.amplitudes.size());
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    re[i] = state.amplitudes[i].real();
    im[i] = state.amplitudes[i].imag();
  }
  return {{"atoms", state.atoms}, {"re", re}, {"im", im}};
}

QuantumState state_from_json(const nlohmann::json& j) {
  QuantumState s;
  s.atoms = j.at("atoms").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size() || re.size() != (std::size_t{1} << s.atoms)) {
    throw std::invalid_argument("state JSON: amplitude arrays must have 2^atoms entries");
  }
  s.amplitudes.resize(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) s.amplitudes[static_cast<Eigen::Index>(i)] = cd(re[i], im[i]);
  return s;
}

}  // namespace qsvm
