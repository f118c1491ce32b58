#include "hrelay/baselines.hpp"

#include <cmath>

namespace hrelay {

std::string to_string(BaselineScheme s) {
  switch (s) {
    case BaselineScheme::random:
      return "random";
    case BaselineScheme::max_dl:
      return "max_dl";
    case BaselineScheme::max_energy:
      return "max_energy";
    case BaselineScheme::dl_only:
      return "dl_only";
  }
  return "?";
}

BaselineScheme parse_baseline(const std::string& s) {
  if (s == "random") return BaselineScheme::random;
  if (s == "max_dl") return BaselineScheme::max_dl;
  if (s == "max_energy") return BaselineScheme::max_energy;
  if (s == "dl_only") return BaselineScheme::dl_only;
  throw DomainError("unknown baseline '" + s + "'");
}

CVector random_unit_vector(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector w(k);
  for (int i = 0; i < k; ++i) w(i) = Complex(n(rng), n(rng));
  const double norm = w.norm();
  return norm > 0.0 ? CVector(w / norm) : CVector(CVector::Unit(k, 0));
}

namespace {

double at_limit(const EnhancedChannels& enh, HybridAction& a, const LinkBudget& budget) {
  a.relay_powers = power_budgets(enh, a.w0, a.t, budget);
  return throughput(enh, a, budget);
}

}  // namespace

BaselineResult run_baseline(BaselineScheme scheme, const ChannelRealization& ch,
                            const LinkBudget& budget, double gamma_max, std::mt19937_64& rng) {
  budget.validate();
  const int k = ch.antennas();
  const int n = ch.relay_count();
  BaselineResult out;
  if (scheme == BaselineScheme::dl_only) {
    out.reward = std::log2(1.0 + budget.p_t * ch.f0.squaredNorm());
    return out;
  }
  HybridAction a;
  a.modes.assign(static_cast<std::size_t>(n), false);
  a.phases.assign(static_cast<std::size_t>(n), 0.0);
  const EnhancedChannels enh = enhance_channels(ch, a.relay_config(gamma_max));

  if (scheme == BaselineScheme::random) {
    a.t = 0.25;
    a.w0 = random_unit_vector(k, rng);
    a.w1 = random_unit_vector(k, rng);
    out.reward = at_limit(enh, a, budget);
    out.action = std::move(a);
    return out;
  }

  if (scheme == BaselineScheme::max_dl) {
    a.w0 = a.w1 = enh.f0_hat.norm() > 0.0 ? unit_align(enh.f0_hat) : CVector(CVector::Unit(k, 0));
  } else {
    CMatrix s = CMatrix::Zero(k, k);
    for (const auto& f : enh.f_hat) s += f * f.adjoint();
    a.w0 = a.w1 = s.norm() > 0.0 ? principal_eigvec(s).vector : CVector(CVector::Unit(k, 0));
  }
  out.reward = -1.0;
  for (int i = 1; i <= 49; ++i) {
    HybridAction trial = a;
    trial.t = 0.01 * i;
    const double r = at_limit(enh, trial, budget);
    if (r > out.reward) {
      out.reward = r;
      out.action = std::move(trial);
    }
  }
  return out;
}

}  // namespace hrelay
