#include "qsvm/embedding.hpp"

#include "qsvm/json_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qsvm {
namespace {

constexpr double kSqrt3Over2 = 0.86602540378443864676;

Eigen::VectorXd flatten(const Register& reg) {
  Eigen::VectorXd x(2 * reg.size());
  for (Eigen::Index i = 0; i < reg.size(); ++i) {
    x[2 * i] = reg.coords(i, 0);
    x[2 * i + 1] = reg.coords(i, 1);
  }
  return x;
}

Register unflatten(const Eigen::VectorXd& x) {
  Register reg;
  reg.coords.resize(x.size() / 2, 2);
  for (Eigen::Index i = 0; i < reg.coords.rows(); ++i) {
    reg.coords(i, 0) = x[2 * i];
    reg.coords(i, 1) = x[2 * i + 1];
  }
  return reg;
}

Eigen::MatrixXd clipped_targets(const QuboMatrix& target, double scale) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(target.rows(), target.cols());
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < target.cols(); ++j) t(i, j) = scale * std::max(target(i, j), 0.0);
  }
  return t;
}

Register centered(Register reg) {
  const Eigen::RowVector2d c = reg.centroid();
  reg.coords.rowwise() -= c;
  return reg;
}

// Sequential rejection sampling inside a disk; the disk grows if it gets crowded.
Register random_feasible(Eigen::Index n, double radius, const HardwareConstraints& hw, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spacing = hw.min_distance * 1.05;
  for (;;) {
    Register reg;
    reg.coords.resize(n, 2);
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
        const double r = radius * std::sqrt(unit(rng));
        const double phi = 2.0 * M_PI * unit(rng);
        const Eigen::RowVector2d p(r * std::cos(phi), r * std::sin(phi));
        placed = true;
        for (Eigen::Index j = 0; j < i; ++j) {
          if ((reg.coords.row(j) - p).norm() < spacing) {
            placed = false;
            break;
          }
        }
        if (placed) reg.coords.row(i) = p;
      }
      ok = placed;
    }
    if (ok) return reg;
    radius *= 1.2;
  }
}

// Pushes overlapping pairs apart and pulls outlying atoms inwards until the
// register validates or the iteration budget runs out.
Register project_feasible(Register reg, const HardwareConstraints& hw) {
  const double dmin = hw.min_distance * (1.0 + 1e-6);
  const double rmax = hw.max_radius * (1.0 - 1e-6);
  const Eigen::Index n = reg.size();
  for (int iter = 0; iter < 500; ++iter) {
    reg = centered(std::move(reg));
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        Eigen::RowVector2d d = reg.coords.row(j) - reg.coords.row(i);
        double r = d.norm();
        if (r >= dmin) continue;
        if (r == 0.0) {
          const double phi = 2.399963229728653 * static_cast<double>(i * n + j);
          d = Eigen::RowVector2d(std::cos(phi), std::sin(phi));
          r = 1.0;
          reg.coords.row(j) += 1e-9 * d;
        }
        const Eigen::RowVector2d push = 0.5 * (dmin - r) / r * d;
        reg.coords.row(i) -= push;
        reg.coords.row(j) += push;
        changed = true;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = reg.coords.row(i).norm();
      if (r > rmax) {
        reg.coords.row(i) *= rmax / r;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return centered(std::move(reg));
}

Eigen::Vector2d lattice_point(long i, long j, double pitch) {
  return {pitch * (static_cast<double>(i) + 0.5 * static_cast<double>(j)), pitch * kSqrt3Over2 * static_cast<double>(j)};
}

}  // namespace

void validate(const HardwareConstraints& c) {
  if (c.max_atoms < 1) throw std::invalid_argument("max_atoms must be >= 1");
  if (!(c.min_distance > 0.0)) throw std::invalid_argument("min_distance must be > 0");
  if (!(c.max_radius > c.min_distance)) throw std::invalid_argument("max_radius must exceed min_distance");
  if (c.lattice == Lattice::triangular && c.lattice_pitch < c.min_distance) {
    throw std::invalid_argument("lattice_pitch must be >= min_distance");
  }
}

std::vector<Violation> validate(const Register& reg, const HardwareConstraints& c) {
  std::vector<Violation> out;
  const Eigen::Index n = reg.size();
  if (n > c.max_atoms) out.push_back({"max_atoms", {}, static_cast<double>(n)});
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = (reg.coords.row(i) - reg.coords.row(j)).norm();
      if (r < c.min_distance) out.push_back({"min_distance", {static_cast<int>(i), static_cast<int>(j)}, r});
    }
  }
  if (n > 0) {
    const Eigen::RowVector2d centre = reg.centroid();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = (reg.coords.row(i) - centre).norm();
      if (r > c.max_radius) out.push_back({"max_radius", {static_cast<int>(i)}, r});
    }
  }
  return out;
}

std::string describe(const Violation& v) {
  std::ostringstream ss;
  ss << v.constraint;
  if (!v.atoms.empty()) {
    ss << " atoms";
    for (int a : v.atoms) ss << ' ' << a;
  }
  ss << " (value " << v.value << ")";
  return ss.str();
}

Eigen::MatrixXd interaction_matrix(const Register& reg, double c6) {
  const Eigen::Index n = reg.size();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r2 = (reg.coords.row(i) - reg.coords.row(j)).squaredNorm();
      if (r2 == 0.0) {
        throw std::invalid_argument("interaction_matrix: atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                    " coincide");
      }
      u(i, j) = u(j, i) = c6 / (r2 * r2 * r2);
    }
  }
  return u;
}

double embedding_loss(const Register& reg, const QuboMatrix& target, double c6, double scale) {
  if (target.rows() != reg.size() || target.cols() != reg.size()) {
    throw std::invalid_argument("embedding_loss: register has " + std::to_string(reg.size()) +
                                " atoms but target dimension is " + std::to_string(target.rows()));
  }
  const Eigen::MatrixXd u = interaction_matrix(reg, c6);
  const Eigen::MatrixXd t = clipped_targets(target, scale);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < u.cols(); ++j) loss += (u(i, j) - t(i, j)) * (u(i, j) - t(i, j));
  }
  return loss;
}

EmbeddingReport embed(const QuboMatrix& target, const HardwareConstraints& hw, const EmbedOptions& options,
                      std::uint64_t seed) {
  check_qubo(target);
  validate(hw);
  const Eigen::Index n = target.rows();
  if (n > hw.max_atoms) {
    throw std::invalid_argument("embed: " + std::to_string(n) + " atoms requested but the device allows a maximum of " +
                                std::to_string(hw.max_atoms));
  }
  if (options.restarts < 1) throw std::invalid_argument("embed: restarts must be >= 1");

  const Eigen::MatrixXd t = clipped_targets(target, options.target_scale);
  std::vector<double> positive;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (t(i, j) > 0.0) positive.push_back(t(i, j));
  double typical = hw.max_radius / 2.0;
  if (!positive.empty()) {
    std::nth_element(positive.begin(), positive.begin() + positive.size() / 2, positive.end());
    typical = std::pow(options.c6 / positive[positive.size() / 2], 1.0 / 6.0);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double init_radius =
      std::clamp(0.6 * typical * sqrt_n, 0.75 * hw.min_distance * sqrt_n, 0.9 * hw.max_radius);

  const double c6 = options.c6;
  const double mu = options.penalty_weight;
  auto objective = [&](const Eigen::VectorXd& x) {
    double loss = 0.0, pen = 0.0;
    Eigen::Vector2d centre = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) centre += Eigen::Vector2d(x[2 * i], x[2 * i + 1]);
    centre /= static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dx = x[2 * i] - x[2 * j], dy = x[2 * i + 1] - x[2 * j + 1];
        const double r2 = std::max(dx * dx + dy * dy, 1e-12);
        const double u = c6 / (r2 * r2 * r2);
        loss += (u - t(i, j)) * (u - t(i, j));
        const double r = std::sqrt(r2);
        if (r < hw.min_distance) pen += (hw.min_distance - r) * (hw.min_distance - r);
      }
      const double r = (Eigen::Vector2d(x[2 * i], x[2 * i + 1]) - centre).norm();
      if (r > hw.max_radius) pen += (r - hw.max_radius) * (r - hw.max_radius);
    }
    return loss + mu * pen;
  };

  auto place = [&](Register reg) {
    reg = project_feasible(std::move(reg), hw);
    if (hw.lattice == Lattice::triangular) reg = snap_to_lattice(reg, hw.lattice_pitch);
    return reg;
  };

  EmbeddingReport best;
  bool found = false;
  double best_initial = 0.0;
  Register best_attempt;
  double best_attempt_value = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < options.restarts; ++restart) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
    const Register initial = place(random_feasible(n, init_radius, hw, rng));
    const bool initial_ok = validate(initial, hw).empty();
    const double initial_loss = embedding_loss(initial, target, c6, options.target_scale);
    if (restart == 0) best_initial = initial_loss;

    const auto result = minimize_linear_trust_region(objective, flatten(initial), options.optimizer);
    Register candidate = place(unflatten(result.x));
    const bool candidate_ok = validate(candidate, hw).empty();
    double candidate_loss = embedding_loss(candidate, target, c6, options.target_scale);

    if (!candidate_ok || (initial_ok && candidate_loss > initial_loss)) {
      if (!initial_ok) {
        if (result.value < best_attempt_value) {
          best_attempt_value = result.value;
          best_attempt = candidate;
        }
        continue;
      }
      candidate = initial;
      candidate_loss = initial_loss;
    }
    if (!found || candidate_loss < best.loss) {
      found = true;
      best.reg = candidate;
      best.loss = candidate_loss;
      best.iterations = result.evaluations;
      best.restart = restart;
    }
  }

  if (!found) {
    throw EmbeddingError("embed: no restart produced a register satisfying the hardware constraints", best_attempt);
  }
  best.initial_loss = best_initial;
  best.target = target;
  best.achieved = interaction_matrix(best.reg, c6);
  return best;
}

Register snap_to_lattice(const Register& reg, double pitch) {
  if (!(pitch > 0.0)) throw std::invalid_argument("snap_to_lattice: pitch must be > 0");
  using Node = std::pair<long, long>;
  std::vector<Node> used;
  Register out = reg;
  const double tie_tol = 1e-9 * pitch;

  auto better = [&](double d, const Node& node, double best_d, const Node& best_node) {
    if (d < best_d - tie_tol) return true;
    if (d > best_d + tie_tol) return false;
    return node < best_node;
  };

  for (Eigen::Index a = 0; a < reg.size(); ++a) {
    const Eigen::Vector2d p = reg.coords.row(a).transpose();
    const double jf = p.y() / (pitch * kSqrt3Over2);
    const double if_ = p.x() / pitch - 0.5 * jf;
    const long ic = static_cast<long>(std::floor(if_));
    const long jc = static_cast<long>(std::floor(jf));

    Node chosen{0, 0};
    for (long window = 2;; window += 2) {
      double best_d = std::numeric_limits<double>::infinity();
      bool any = false;
      for (long i = ic - window; i <= ic + window + 1; ++i) {
        for (long j = jc - window; j <= jc + window + 1; ++j) {
          const Node node{i, j};
          if (std::find(used.begin(), used.end(), node) != used.end()) continue;
          const double d = (lattice_point(i, j, pitch) - p).norm();
          if (!any || better(d, node, best_d, chosen)) {
            best_d = d;
            chosen = node;
            any = true;
          }
        }
      }
      // Any node outside the window is at least (window - 1) * pitch * sqrt(3)/2 away.
      if (any && best_d <= (static_cast<double>(window) - 1.0) * pitch * kSqrt3Over2) break;
    }
    used.push_back(chosen);
    out.coords.row(a) = lattice_point(chosen.first, chosen.second, pitch).transpose();
  }
  return out;
}

nlohmann::json to_json(const Register& reg) {
  nlohmann::json coords = nlohmann::json::array();
  for (Eigen::Index i = 0; i < reg.size(); ++i) coords.push_back({reg.coords(i, 0), reg.coords(i, 1)});
  return {{"coords_um", coords}};
}

Register register_from_json(const nlohmann::json& j) {
  const auto& coords = j.at("coords_um");
  Register reg;
  reg.coords.resize(static_cast<Eigen::Index>(coords.size()), 2);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto xy = coords[i].get<std::vector<double>>();
    if (xy.size() != 2) throw std::invalid_argument("register JSON: each coordinate needs exactly 2 values");
    reg.coords(static_cast<Eigen::Index>(i), 0) = xy[0];
    reg.coords(static_cast<Eigen::Index>(i), 1) = xy[1];
  }
  return reg;
}

nlohmann::json to_json(const EmbeddingReport& r) {
  std::vector<double> diag(r.target.rows());
  int clipped = 0;
  for (Eigen::Index i = 0; i < r.target.rows(); ++i) {
    diag[i] = r.target(i, i);
    for (Eigen::Index c = i + 1; c < r.target.cols(); ++c) clipped += r.target(i, c) < 0.0 ? 1 : 0;
  }
  return {{"register", to_json(r.reg)},
          {"loss", r.loss},
          {"initial_loss", r.initial_loss},
          {"iterations", r.iterations},
          {"restart", r.restart},
          {"achieved_interactions", matrix_to_json(r.achieved)},
          {"diagonal_matched", false},
          {"unmatched_target_diagonal", diag},
          {"negative_couplings_clipped", clipped}};
}

nlohmann::json to_json(const HardwareConstraints& c) {
  return {{"max_atoms", c.max_atoms},
          {"min_distance", c.min_distance},
          {"max_radius", c.max_radius},
          {"lattice", c.lattice == Lattice::triangular ? "triangular" : "none"},
          {"lattice_pitch", c.lattice_pitch}};
}

HardwareConstraints constraints_from_json(const nlohmann::json& j) {
  HardwareConstraints c;
  c.max_atoms = j.value("max_atoms", c.max_atoms);
  c.min_distance = j.value("min_distance", c.min_distance);
  c.max_radius = j.value("max_radius", c.max_radius);
  const auto lattice = j.value("lattice", std::string("none"));
  if (lattice == "triangular") c.lattice = Lattice::triangular;
  else if (lattice != "none") throw std::invalid_argument("unknown lattice: " + lattice);
  c.lattice_pitch = j.value("lattice_pitch", c.lattice_pitch);
  validate(c);
  return c;
}

}  // namespace qsvm
