#pragma once

#include <map>
#include <utility>
#include <vector>

#include "hrelay/feasibility_sdp.hpp"

namespace hrelay {

struct Vertex {
  double t = 0.5;
  double gamma_bar = 0.0;

  bool operator==(const Vertex&) const = default;
};

/// r(t, gamma_bar) = t log2(1 + gamma_bar).
double vertex_value(const Vertex& v);

struct Polyblock {
  std::vector<Vertex> vertices;
  double r_upper = 0.0;
  double r_lower = 0.0;
};

/// 2 p_t ||f0_hat||^2 + p_t sum_n ||f_hat_n||^2.
double gamma_max(const EnhancedChannels& enh, double p_t);

struct BisectionStep {
  double lambda;
  double m;          // relaxed optimum at lambda * t, or the cached bound that decided it
  bool feasible;
  bool solved;       // false when decided from earlier solves
};

/// Relaxed solves at fixed channels, keyed by hop time. Because m(tau) is
/// nonincreasing, a solve at tau_b >= tau certifies m(tau) >= m(tau_b) and one
/// at tau_a <= tau certifies m(tau) <= m(tau_a).
class FrontierCache {
 public:
  void insert(double tau, double m) { entries_[tau] = m; }
  // Smallest cached tau' >= tau, if any.
  const std::pair<const double, double>* at_or_above(double tau) const;
  // Largest cached tau' <= tau, if any.
  const std::pair<const double, double>* at_or_below(double tau) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<double, double> entries_;
};

struct Projection {
  double lambda = 1.0;             // largest verified-feasible factor
  double lambda_infeasible = 1.0;  // smallest verified-infeasible factor (== lambda when z feasible)
  Vertex o;
  std::vector<FeasibilityResult> solves_made;  // every solve, in order
  std::vector<double> solve_taus;
  std::vector<BisectionStep> trace;
};

/// Largest lambda with lambda*z in the relaxed feasible set, to within lambda_tol.
Projection project(const Vertex& z, const EnhancedChannels& enh, const LinkBudget& budget,
                   double lambda_tol, const SolverOptions& solver = {},
                   FrontierCache* cache = nullptr);

/// Removes the cone above `o` from the polyblock: `z` and every vertex strictly
/// above `o` are replaced by their two children, then dominated vertices go.
/// r_upper is refreshed; r_lower is left alone.
Polyblock cut(Polyblock poly, const Vertex& z, const Vertex& o);

struct LowerBoundOptions {
  double eps = 1e-2;
  int max_iter = 200;
  double lambda_tol = 1e-3;
  SolverOptions solver;
};

struct LowerBoundResult {
  double value = 0.0;  // t log2(1 + restored objective) of the witness
  double t_opt = 0.5;
  CVector w0_opt;
  CVector w1_opt;          // as returned by extraction
  int iterations = 0;
  double gap = 0.0;        // r_upper - r_lower
  double r_upper = 0.0;
  double r_lower = 0.0;
  bool converged = false;  // false when max_iter ran out
  int solves = 0;
  std::vector<double> upper_history;
  std::vector<double> lower_history;
  // Executable witness: w1 rotated and relay powers chosen by drive_relays,
  // evaluated by throughput().
  CVector w1_exec;
  std::vector<double> relay_powers;
  double achieved = 0.0;
};

LowerBoundResult solve_lower_bound(const EnhancedChannels& enh, const LinkBudget& budget,
                                   const LowerBoundOptions& opts = {});

struct FixedTResult {
  double value = 0.0;     // t log2(1 + m), relaxed
  double restored = 0.0;  // t log2(1 + restored objective)
  CVector w0;
  CVector w1;
  CVector w1_exec;
  std::vector<double> relay_powers;
  double achieved = 0.0;
};

/// One relaxed solve at hop time t.
FixedTResult solve_fixed_t(const EnhancedChannels& enh, const LinkBudget& budget, double t,
                           const SolverOptions& solver = {});

}  // namespace hrelay
