#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsvm/linear_trust_region.hpp"
#include "qsvm/qubo.hpp"

namespace qsvm {

/// Van der Waals coefficient in rad * um^6 / us.
inline constexpr double kDefaultC6 = 5420158.53;

/// Atom positions in micrometres, one row per atom.
struct Register {
  Eigen::Matrix<double, Eigen::Dynamic, 2> coords;

  Eigen::Index size() const { return coords.rows(); }
  Eigen::RowVector2d centroid() const { return coords.colwise().mean(); }
};

enum class Lattice { none, triangular };

struct HardwareConstraints {
  int max_atoms = 25;
  double min_distance = 5.0;
  double max_radius = 35.0;
  Lattice lattice = Lattice::none;
  double lattice_pitch = 5.0;
};

void validate(const HardwareConstraints& constraints);

struct Violation {
  std::string constraint;  // "max_atoms", "min_distance" or "max_radius"
  std::vector<int> atoms;
  double value = 0.0;
};

std::vector<Violation> validate(const Register& reg, const HardwareConstraints& constraints);
std::string describe(const Violation& v);

/// U_ij = c6 / r_ij^6 off the diagonal, zero on it. Units rad/us.
Eigen::MatrixXd interaction_matrix(const Register& reg, double c6 = kDefaultC6);

/// sum_{i<j} (U_ij - scale * max(Q_ij, 0))^2.
double embedding_loss(const Register& reg, const QuboMatrix& target, double c6 = kDefaultC6, double scale = 1.0);

struct EmbedOptions {
  double c6 = kDefaultC6;
  /// Global factor applied to the target couplings before matching.
  double target_scale = 1.0;
  int restarts = 8;
  double penalty_weight = 1e4;
  TrustRegionOptions optimizer{2.0, 1e-3, 6000};
};

struct EmbeddingReport {
  Register reg;
  double loss = 0.0;
  double initial_loss = 0.0;
  QuboMatrix target;
  Eigen::MatrixXd achieved;
  int iterations = 0;
  int restart = 0;
};

/// Raised when no restart produced a register passing validation.
class EmbeddingError : public std::runtime_error {
 public:
  EmbeddingError(const std::string& what, Register best_attempt)
      : std::runtime_error(what), best_attempt_(std::move(best_attempt)) {}
  const Register& best_attempt() const { return best_attempt_; }

 private:
  Register best_attempt_;
};

/// Places target.dim atoms so their pairwise interactions approximate the
/// positive off-diagonal couplings of `target`. The diagonal is not matched:
/// a single global detuning cannot address atoms individually.
EmbeddingReport embed(const QuboMatrix& target, const HardwareConstraints& constraints, const EmbedOptions& options,
                      std::uint64_t seed);

/// Moves every atom to its nearest triangular-lattice node (ties go to the
/// lexicographically smaller (i, j) node index); an atom landing on an
/// occupied node is moved to the nearest free one.
Register snap_to_lattice(const Register& reg, double pitch);

nlohmann::json to_json(const Register& reg);
Register register_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EmbeddingReport& report);
nlohmann::json to_json(const HardwareConstraints& c);
HardwareConstraints constraints_from_json(const nlohmann::json& j);

}  // namespace qsvm
