#include "hrelay/phy_layer.hpp"

#include <cmath>
#include <string>

namespace hrelay {

void LinkBudget::validate() const {
  if (!(p_t > 0.0)) throw DomainError("link budget: p_t must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("link budget: eta outside (0,1]");
}

double snr_first_hop(const EnhancedChannels& enh, const CVector& w1, double p_t) {
  return p_t * std::norm(hdot(enh.f0_hat, w1));
}

double amplifier_coeff(double p_n, Complex y_n) {
  if (p_n < 0.0) throw DomainError("amplifier_coeff: negative power");
  return std::sqrt(p_n / (1.0 + std::norm(y_n)));
}

double snr_second_hop(const EnhancedChannels& enh, const CVector& w1, double p_t,
                      const std::vector<double>& powers) {
  if (static_cast<int>(powers.size()) != enh.active_count())
    throw StructuralError("snr_second_hop: one power per active relay expected");
  const double sqrt_pt = std::sqrt(p_t);
  Complex num = sqrt_pt * enh.f0_hat.norm();
  double den = 1.0;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const Complex y = sqrt_pt * hdot(enh.f_hat[i], w1);
    const double x = amplifier_coeff(powers[i], y);
    num += x * y * enh.g_hat[i];
    den += std::norm(x * enh.g_hat[i]);
  }
  return std::norm(num) / den;
}

namespace {

void check_t(double t) {
  if (!(t > 0.0 && t <= 0.5)) throw DomainError("slot fraction t outside (0, 1/2]");
}

}  // namespace

double power_budget(const EnhancedChannels& enh, const CVector& w0, double t,
                    const LinkBudget& budget, int relay) {
  check_t(t);
  const int slot = enh.slot_of(relay);
  if (slot < 0) throw StructuralError("power_budget: relay " + std::to_string(relay) + " is not active");
  const double s0 = std::norm(hdot(enh.f_hat[static_cast<std::size_t>(slot)], w0));
  return budget.eta * (1.0 - 2.0 * t) / t * budget.p_t * enh.noise_power * s0;
}

std::vector<double> power_budgets(const EnhancedChannels& enh, const CVector& w0, double t,
                                  const LinkBudget& budget) {
  std::vector<double> out;
  out.reserve(enh.active.size());
  for (int id : enh.active) out.push_back(power_budget(enh, w0, t, budget, id));
  return out;
}

double throughput(const EnhancedChannels& enh, const HybridAction& action,
                  const LinkBudget& budget) {
  check_t(action.t);
  if (action.w0.size() != enh.antennas() || action.w1.size() != enh.antennas())
    throw StructuralError("throughput: beamformer dimension != K");
  if (action.w0.norm() > 1.0 + kBudgetSlack || action.w1.norm() > 1.0 + kBudgetSlack)
    throw DomainError("throughput: beamformer norm exceeds 1");
  if (static_cast<int>(action.relay_powers.size()) != enh.active_count())
    throw StructuralError("throughput: one power per active relay expected");
  const std::vector<double> caps = power_budgets(enh, action.w0, action.t, budget);
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const double p = action.relay_powers[i];
    if (p < 0.0) throw DomainError("throughput: negative relay power");
    if (p > caps[i] + kBudgetSlack * std::max(1.0, caps[i]))
      throw ConstraintViolation(enh.active[i], "relay " + std::to_string(enh.active[i]) +
                                                   " power exceeds its harvested budget");
  }
  const double g1 = snr_first_hop(enh, action.w1, budget.p_t);
  const double g2 = snr_second_hop(enh, action.w1, budget.p_t, action.relay_powers);
  return action.t * std::log2(1.0 + g1 + g2);
}

namespace {

// argmax over x in [0, x_max] of |A + x c|^2 / (B + d x^2).
double best_gain(Complex A, double B, Complex c, double d, double x_max) {
  auto f = [&](double x) { return std::norm(A + x * c) / (B + d * x * x); };
  double best_x = 0.0;
  double best = f(0.0);
  auto consider = [&](double x) {
    if (!(x >= 0.0 && x <= x_max)) return;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  };
  consider(x_max);
  // Stationary points: d R x^2 - (|c|^2 B - d |A|^2) x - R B = 0, R = Re(conj(A) c).
  const double R = (std::conj(A) * c).real();
  const double qa = d * R;
  const double qb = -(std::norm(c) * B - d * std::norm(A));
  const double qc = -R * B;
  if (std::abs(qa) > 0.0) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
      if (q != 0.0) {
        consider(q / qa);
        consider(qc / q);
      }
    }
  } else if (qb != 0.0) {
    consider(-qc / qb);
  }
  return best_x;
}

}  // namespace

RelayDrive drive_relays(const EnhancedChannels& enh, const CVector& w0, const CVector& w1, double t,
                        const LinkBudget& budget) {
  const std::vector<double> caps = power_budgets(enh, w0, t, budget);
  const std::size_t n = caps.size();
  const double sqrt_pt = std::sqrt(budget.p_t);
  const double direct = sqrt_pt * enh.f0_hat.norm();

  RelayDrive out{w1, std::vector<double>(n, 0.0)};
  std::vector<Complex> y(n);
  std::vector<double> x(n), x_max(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = sqrt_pt * hdot(enh.f_hat[i], w1);
    const double ny = std::norm(y[i]);
    x_max[i] = std::sqrt(caps[i] / (1.0 + ny));
    // Power at which the relayed copy matches the direct one in the sense of
    // |y| = direct * x |g|; exact optimum for a single relay.
    const double denom = direct * direct * std::norm(enh.g_hat[i]);
    const double p_star = denom > 0.0 ? ny * (1.0 + ny) / denom : caps[i];
    x[i] = std::sqrt(std::min(caps[i], p_star) / (1.0 + ny));
  }

  auto relayed_sum = [&]() {
    Complex s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i] * enh.g_hat[i];
    return s;
  };
  auto rotate = [&]() {
    const Complex s = relayed_sum();
    if (!(std::abs(s) > 0.0)) return;
    const Complex r = std::polar(1.0, -std::arg(s));
    out.w1 *= r;
    for (auto& v : y) v *= r;
  };

  for (int round = 0; round < 3; ++round) {
    rotate();
    for (int sweep = 0; sweep < 50; ++sweep) {
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Complex A = direct;
        double B = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          A += x[j] * y[j] * enh.g_hat[j];
          B += x[j] * x[j] * std::norm(enh.g_hat[j]);
        }
        const double next = best_gain(A, B, y[i] * enh.g_hat[i], std::norm(enh.g_hat[i]), x_max[i]);
        change = std::max(change, std::abs(next - x[i]) / std::max(x_max[i], 1e-300));
        x[i] = next;
      }
      if (change < 1e-12) break;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    out.powers[i] = std::min(caps[i], x[i] * x[i] * (1.0 + std::norm(y[i])));
  return out;
}

}  // namespace hrelay
