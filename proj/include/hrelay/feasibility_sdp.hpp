#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hrelay/network_model.hpp"
#include "hrelay/phy_layer.hpp"

namespace hrelay {

/// Relaxed beamforming subproblem for a fixed hop time tau.
struct FeasibilityInstance {
  EnhancedChannels enh;
  LinkBudget budget;
  double tau = 0.25;  // in (0, 1/2]

  void validate() const;
  /// psi_n = eta p_t sigma^2 |g_hat_n|^2 ||f0_hat||^2 for active slot n.
  double psi(int slot) const;
  /// psi_n (1/tau - 2).
  double energy_coeff(int slot) const;
};

struct SolverOptions {
  double tol = 1e-4;         // relative accuracy of m
  int max_newton = 400;      // total Newton steps before NumericalError
  bool extract = true;       // run rank-1 extraction
  int randomization_samples = 200;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct FeasibilityResult {
  double m = 0.0;  // relaxed optimum
  CHermitian W0;
  CHermitian W1;
  CVector w0;  // extracted, unit norm (zero only as last resort)
  CVector w1;
  std::vector<std::pair<double, double>> s_values;  // (s0, s1) per active slot, relaxed
  double restored = 0.0;   // objective of (w0, w1) with s1 capped by the LMI
  double rank1_gap = 0.0;  // m - restored
  int newton_steps = 0;
};

/// Scalar form of [[q, sqrt(p_t) s1], [sqrt(p_t) s1, 1]] >= 0.
bool lmi_holds(double q, double s1, double p_t);

/// Largest s >= 0 with s (1 + p_t s) <= energy; 0 for energy <= 0.
double lmi_cap(double energy, double p_t);

/// sup over tau of the relaxed optimum (tau -> 0 removes the energy limits).
double relaxation_sup(const EnhancedChannels& enh, double p_t);

/// Objective of a beamformer pair with each s1 capped so the LMI holds.
double rank1_objective(const FeasibilityInstance& inst, const CVector& w0, const CVector& w1);

FeasibilityResult solve_feasibility(const FeasibilityInstance& inst,
                                    const SolverOptions& opts = {});

/// Principal direction of W; falls back to Gaussian randomization with
/// covariance W when its score trails `relaxed` by more than tol * |relaxed|.
/// Returns the best scoring unit vector, or zero if zero scores higher.
CVector extract_rank1(const CHermitian& W, const std::function<double(const CVector&)>& score,
                      double relaxed, double tol, int samples, std::uint64_t seed);

/// Best objective over `samples` uniformly drawn unit pairs (w0, w1).
double feasibility_oracle(const FeasibilityInstance& inst, int samples, std::uint64_t seed);

}  // namespace hrelay
