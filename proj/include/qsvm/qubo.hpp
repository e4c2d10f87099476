#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsvm/util.hpp"

namespace qsvm {

using QuboMatrix = Eigen::MatrixXd;

/// Throws std::invalid_argument unless `q` is a non-empty, square, finite matrix.
template <typename Derived>
void check_qubo(const Eigen::MatrixBase<Derived>& q) {
  if (q.rows() < 1 || q.rows() != q.cols()) {
    throw std::invalid_argument("QUBO matrix must be square with dimension >= 1, got " +
                                std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  }
  if (!q.allFinite()) throw std::invalid_argument("QUBO matrix contains NaN or Inf entries");
}

/// Cost a^T Q a of a binary assignment.
///
/// Accumulates, for each set bit i in ascending order, the term
/// Q_ii + sum_{j<i, a_j=1} (Q_ij + Q_ji). The exhaustive solver builds energies
/// along the same path, so both produce bit-identical values for a state.
template <typename Derived>
typename Derived::Scalar energy(const Eigen::MatrixBase<Derived>& q, const Bitstring& a) {
  using Scalar = typename Derived::Scalar;
  if (q.rows() != q.cols() || static_cast<std::size_t>(q.rows()) != a.size()) {
    throw std::invalid_argument("bitstring length " + std::to_string(a.size()) +
                                " does not match QUBO dimension " + std::to_string(q.rows()));
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!a[i]) continue;
    Scalar term = q(i, i);
    for (Eigen::Index j = 0; j < i; ++j) {
      if (a[j]) term += q(i, j) + q(j, i);
    }
    total += term;
  }
  return total;
}

/// Replaces each off-diagonal pair by its mean; the diagonal is kept. The
/// quadratic form is unchanged.
template <typename Derived>
typename Derived::PlainObject symmetrize(const Eigen::MatrixBase<Derived>& q) {
  check_qubo(q);
  typename Derived::PlainObject out = q;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) {
      const auto mean = (q(i, j) + q(j, i)) / 2;
      out(i, j) = mean;
      out(j, i) = mean;
    }
  }
  return out;
}

struct RankedState {
  Bitstring bits;
  double energy = 0.0;
};

struct SolveResult {
  Bitstring best;
  double energy = 0.0;
  /// Lowest-energy states, ascending by energy then lexicographically.
  std::vector<RankedState> ranked;
};

inline constexpr int kDefaultEnumerationBound = 24;

/// Exhaustive minimisation over all 2^D assignments. Ties are broken towards
/// the lexicographically smallest bitstring.
SolveResult brute_force_solve(const QuboMatrix& q, std::size_t top_k = 1,
                              int max_dim = kDefaultEnumerationBound);

struct AnnealSchedule {
  /// Non-positive selects max|Q_ij| * D.
  double t_initial = 0.0;
  double t_final = 1e-3;
};

/// Single-bit-flip Metropolis annealing with geometric cooling, one
/// temperature per sweep. Returns the best state visited; not guaranteed optimal.
SolveResult simulated_anneal(const QuboMatrix& q, int sweeps, const AnnealSchedule& schedule,
                             std::uint64_t seed);

}  // namespace qsvm
