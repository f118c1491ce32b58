#pragma once

#include <vector>

#include "hrelay/network_model.hpp"

namespace hrelay {

inline constexpr double kTMin = 1e-3;
inline constexpr double kBudgetSlack = 1e-9;

struct HybridAction {
  double t = 0.25;
  CVector w0;
  CVector w1;
  ModeVector modes;
  std::vector<double> phases;
  std::vector<double> relay_powers;  // parallel to EnhancedChannels::active

  RelayConfig relay_config(double gamma_max) const { return {modes, phases, gamma_max}; }
};

/// Transmit power p_t in mW; channels are noise-normalized so SNRs use unit noise.
struct LinkBudget {
  double p_t = 1.0;
  double eta = 0.6;

  void validate() const;
};

double snr_first_hop(const EnhancedChannels& enh, const CVector& w1, double p_t);

/// x_n = sqrt(p_n / (1 + |y_n|^2)).
double amplifier_coeff(double p_n, Complex y_n);

/// Second-hop SNR at the receiver after maximal-ratio combining with
/// w2 aligned to f0_hat. `powers` is parallel to enh.active.
double snr_second_hop(const EnhancedChannels& enh, const CVector& w1, double p_t,
                      const std::vector<double>& powers);

/// Largest relay transmit power sustainable from the energy slot of length 1-2t,
/// for relay id `relay` (must be active). t in (0, 1/2].
double power_budget(const EnhancedChannels& enh, const CVector& w0, double t,
                    const LinkBudget& budget, int relay);

/// Budgets for every active relay, parallel to enh.active.
std::vector<double> power_budgets(const EnhancedChannels& enh, const CVector& w0, double t,
                                  const LinkBudget& budget);

/// t * log2(1 + gamma1 + gamma2). Throws ConstraintViolation on a power above budget.
double throughput(const EnhancedChannels& enh, const HybridAction& action,
                  const LinkBudget& budget);

/// Relay drive for given beamformers: w1 rotated so the relayed copies add to
/// the direct term, and per-relay powers within budget that maximize gamma2.
struct RelayDrive {
  CVector w1;
  std::vector<double> powers;
};

RelayDrive drive_relays(const EnhancedChannels& enh, const CVector& w0, const CVector& w1, double t,
                        const LinkBudget& budget);

}  // namespace hrelay
