#include "qsvm/linear_trust_region.hpp"

#include <cmath>
#include <stdexcept>

namespace qsvm {

TrustRegionResult minimize_linear_trust_region(const std::function<double(const Eigen::VectorXd&)>& objective,
                                               const Eigen::VectorXd& start, const TrustRegionOptions& options) {
  if (!(options.rho_begin > 0.0) || !(options.rho_end > 0.0) || options.rho_end > options.rho_begin) {
    throw std::invalid_argument("trust region: require 0 < rho_end <= rho_begin");
  }
  const Eigen::Index n = start.size();
  TrustRegionResult out;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return objective(x);
  };

  Eigen::VectorXd best = start;
  double best_value = eval(best);
  double rho = options.rho_begin;

  // Rows of `offsets` are simplex vertices relative to `best`.
  Eigen::MatrixXd offsets(n, n);
  Eigen::VectorXd deltas(n);
  bool fresh = false;

  auto rebuild = [&] {
    offsets = rho * Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n && evals < options.max_evaluations; ++i) {
      deltas[i] = eval(best + offsets.row(i).transpose()) - best_value;
    }
    fresh = true;
  };

  if (n == 0) {
    out.x = best;
    out.value = best_value;
    out.evaluations = evals;
    return out;
  }

  rebuild();
  while (evals < options.max_evaluations) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(offsets);
    if (!lu.isInvertible()) {
      rebuild();
      continue;
    }
    const Eigen::VectorXd gradient = lu.solve(deltas);
    const double gnorm = gradient.norm();
    if (!(gnorm > 0.0) || !std::isfinite(gnorm)) {
      if (!fresh) {
        rebuild();
        continue;
      }
      rho *= 0.5;
      if (rho < options.rho_end) break;
      rebuild();
      continue;
    }

    const Eigen::VectorXd step = -(rho / gnorm) * gradient;
    const Eigen::VectorXd trial = best + step;
    const double trial_value = eval(trial);

    if (trial_value < best_value) {
      // Drop the vertex carrying the largest share of the step so the new
      // simplex stays non-degenerate; the old incumbent takes its place.
      const Eigen::VectorXd lambda = lu.transpose().solve(step);
      Eigen::Index drop = 0;
      lambda.cwiseAbs().maxCoeff(&drop);
      const double old_value = best_value;
      offsets.row(drop).setZero();
      deltas[drop] = 0.0;
      // Re-express every vertex relative to the new incumbent.
      for (Eigen::Index i = 0; i < n; ++i) {
        offsets.row(i) -= step.transpose();
        deltas[i] += old_value - trial_value;
      }
      best = trial;
      best_value = trial_value;
      fresh = false;
      const double far = offsets.rowwise().norm().maxCoeff();
      if (far > 3.0 * rho) rebuild();
      continue;
    }

    if (!fresh) {
      rebuild();
      continue;
    }
    rho *= 0.5;
    if (rho < options.rho_end) break;
    rebuild();
  }

  out.x = best;
  out.value = best_value;
  out.evaluations = evals;
  out.final_rho = rho;
  return out;
}

}  // namespace qsvm
