#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qsvm {

/// Options for the linear-approximation trust-region minimiser.
struct TrustRegionOptions {
  double rho_begin = 1.0;
  double rho_end = 1e-4;
  int max_evaluations = 5000;
};

struct TrustRegionResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  double final_rho = 0.0;
};

/// Derivative-free minimisation in the spirit of COBYLA: a linear model is
/// interpolated on a simplex of n+1 points around the incumbent, a step of
/// length rho is taken against the model gradient, and rho is halved when
/// a step from a freshly built simplex fails to improve. Constraints are
/// expected to be folded into `objective` as penalties.
TrustRegionResult minimize_linear_trust_region(const std::function<double(const Eigen::VectorXd&)>& objective,
                                               const Eigen::VectorXd& start, const TrustRegionOptions& options);

}  // namespace qsvm
