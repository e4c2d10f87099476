#include "qsvm/qubo.hpp"

#include <algorithm>
#include <queue>
#include <random>

namespace qsvm {
namespace {

bool ranked_less(const RankedState& a, const RankedState& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.bits < b.bits;
}

struct WorstOnTop {
  bool operator()(const RankedState& a, const RankedState& b) const { return ranked_less(a, b); }
};

// Depth-first enumeration adding bits in ascending order; the running energy
// follows exactly the accumulation order of energy().
class Enumerator {
 public:
  Enumerator(const QuboMatrix& q, std::size_t top_k)
      : q_(q), dim_(static_cast<int>(q.rows())), top_k_(top_k), bits_(dim_, 0) {
    set_.reserve(dim_);
  }

  std::vector<RankedState> run() {
    visit(0, 0.0);
    std::vector<RankedState> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  void offer(double e) {
    if (heap_.size() < top_k_) {
      heap_.push({bits_, e});
      return;
    }
    const auto& worst = heap_.top();
    if (e < worst.energy || (e == worst.energy && bits_ < worst.bits)) {
      heap_.pop();
      heap_.push({bits_, e});
    }
  }

  void visit(int next, double e) {
    offer(e);
    for (int i = next; i < dim_; ++i) {
      double term = q_(i, i);
      for (int j : set_) term += q_(i, j) + q_(j, i);
      bits_[i] = 1;
      set_.push_back(i);
      visit(i + 1, e + term);
      set_.pop_back();
      bits_[i] = 0;
    }
  }

  const QuboMatrix& q_;
  int dim_;
  std::size_t top_k_;
  Bitstring bits_;
  std::vector<int> set_;
  std::priority_queue<RankedState, std::vector<RankedState>, WorstOnTop> heap_;
};

}  // namespace

SolveResult brute_force_solve(const QuboMatrix& q, std::size_t top_k, int max_dim) {
  check_qubo(q);
  if (q.rows() > max_dim) {
    throw std::invalid_argument("QUBO dimension " + std::to_string(q.rows()) +
                                " exceeds the enumeration bound of " + std::to_string(max_dim));
  }
  const std::size_t space = std::size_t{1} << q.rows();
  top_k = std::clamp<std::size_t>(top_k, 1, space);

  SolveResult result;
  result.ranked = Enumerator(q, top_k).run();
  for (auto& s : result.ranked) s.energy = energy(q, s.bits);
  std::stable_sort(result.ranked.begin(), result.ranked.end(), ranked_less);
  result.best = result.ranked.front().bits;
  result.energy = result.ranked.front().energy;
  return result;
}

SolveResult simulated_anneal(const QuboMatrix& q, int sweeps, const AnnealSchedule& schedule,
                             std::uint64_t seed) {
  check_qubo(q);
  if (sweeps < 1) throw std::invalid_argument("simulated_anneal requires sweeps >= 1");
  const auto n = q.rows();

  double t0 = schedule.t_initial;
  if (t0 <= 0.0) t0 = q.cwiseAbs().maxCoeff() * static_cast<double>(n);
  if (t0 <= 0.0) t0 = 1.0;
  const double t1 = std::min(schedule.t_final, t0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Bitstring state(n);
  for (auto& b : state) b = unit(rng) < 0.5 ? 1 : 0;
  const QuboMatrix coupling = q + q.transpose();

  double current = energy(q, state);
  Bitstring best = state;
  double best_energy = current;

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const double frac = sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (sweeps - 1);
    const double temperature = t0 * std::pow(t1 / t0, frac);
    for (Eigen::Index i = 0; i < n; ++i) {
      double field = q(i, i);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i && state[j]) field += coupling(i, j);
      }
      const double delta = state[i] ? -field : field;
      if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
        state[i] ^= 1u;
        current += delta;
        if (current < best_energy) {
          best_energy = current;
          best = state;
        }
      }
    }
  }

  SolveResult result;
  result.best = std::move(best);
  result.energy = energy(q, result.best);
  return result;
}

}  // namespace qsvm
