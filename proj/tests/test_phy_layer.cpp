#include <doctest.h>

#include "fixtures.hpp"
#include "hrelay/phy_layer.hpp"
#include "oracles.hpp"

using namespace hrelay;

namespace {

EnhancedChannels tiny(CVector f0) {
  EnhancedChannels e;
  e.f0_hat = std::move(f0);
  return e;
}

}  // namespace

TEST_CASE("snr_first_hop") {
  CVector f0 = CVector::Zero(3);
  f0(0) = 1.0;
  CHECK(snr_first_hop(tiny(f0), f0, 2.0) == doctest::Approx(2.0));
  CVector w = CVector::Zero(3);
  w(1) = 1.0;
  CHECK(snr_first_hop(tiny(f0), w, 2.0) == 0.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto e = fixture::enhanced(k, 3, ModeVector(5, false));
    const CVector w1 = fixture::random_unit(3, rng);
    CHECK(snr_first_hop(e, w1, 0.7) == doctest::Approx(oracle::gamma1(e, w1, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("amplifier_coeff") {
  CHECK(amplifier_coeff(0.0, Complex(1.0, 2.0)) == 0.0);
  CHECK(amplifier_coeff(3.0, Complex(1.0, 1.0)) == doctest::Approx(1.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = u(rng);
    const Complex y(u(rng), -u(rng));
    const double x = amplifier_coeff(p, y);
    CHECK(std::abs(x * x * (1.0 + std::norm(y)) - p) < 1e-12 * std::max(1.0, p));
  }
  CHECK_THROWS_AS(amplifier_coeff(-1.0, Complex(0.0, 0.0)), DomainError);
}

TEST_CASE("snr_second_hop") {
  const auto none = fixture::enhanced(3, 3, ModeVector(2, true));
  CHECK(snr_second_hop(none, CVector::Unit(3, 0), 1.5, {}) == doctest::Approx(1.5 * none.f0_hat.squaredNorm()));

  const auto e = fixture::enhanced(4, 3, ModeVector{false, true, false});
  CHECK(snr_second_hop(e, CVector::Unit(3, 1), 1.5, {0.0, 0.0}) == doctest::Approx(1.5 * e.f0_hat.squaredNorm()));

  // Scalar single relay, expanded by hand.
  EnhancedChannels s;
  s.f0_hat = CVector::Constant(1, Complex(0.3, 0.4));
  s.f_hat = {CVector::Constant(1, Complex(1.0, -2.0))};
  s.g_hat = {Complex(0.5, 0.5)};
  s.active = {0};
  const double pt = 2.0, p = 3.0;
  const Complex w(0.6, 0.8);
  const Complex y = std::sqrt(pt) * std::conj(s.f_hat[0](0)) * w;
  const double x = std::sqrt(p / (1.0 + std::norm(y)));
  const double expect = std::norm(x * y * s.g_hat[0] + std::sqrt(pt) * 0.5) / (1.0 + std::norm(x * s.g_hat[0]));
  CHECK(snr_second_hop(s, CVector::Constant(1, w), pt, {p}) == doctest::Approx(expect).epsilon(1e-13));

  // A relay with zero channel to the receiver contributes nothing.
  EnhancedChannels z = s;
  z.g_hat[0] = 0.0;
  CHECK(snr_second_hop(z, CVector::Constant(1, w), pt, {p}) == doctest::Approx(pt * std::norm(s.f0_hat(0))).epsilon(1e-14));

  CHECK_THROWS_AS(snr_second_hop(s, CVector::Constant(1, w), pt, {}), StructuralError);
}

TEST_CASE("power_budget") {
  EnhancedChannels e;
  e.f0_hat = CVector::Constant(1, 1.0);
  e.f_hat = {CVector::Constant(1, std::sqrt(0.5))};
  e.g_hat = {1.0};
  e.active = {0};
  const LinkBudget b{1.0, 0.6};
  const CVector w = CVector::Constant(1, 1.0);
  CHECK(power_budget(e, w, 0.25, b, 0) == doctest::Approx(0.6));
  CHECK(power_budget(e, w, 0.5, b, 0) == 0.0);
  CHECK_THROWS_AS(power_budget(e, w, 0.0, b, 0), DomainError);
  CHECK_THROWS_AS(power_budget(e, w, 0.6, b, 0), DomainError);
  CHECK_THROWS_AS(power_budget(e, w, 0.25, b, 3), StructuralError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(0.01, 0.49);
  for (int k = 0; k < 200; ++k) {
    const auto en = fixture::enhanced(k, 3, ModeVector{false, true, false});
    const CVector w0 = fixture::random_unit(3, rng);
    const double t = ut(rng);
    const LinkBudget lb{0.8, 0.6};
    for (int s = 0; s < en.active_count(); ++s) {
      const double s0 = std::norm(oracle::inner(en.f_hat[s], w0));
      CHECK(power_budget(en, w0, t, lb, en.active[s]) ==
            doctest::Approx(0.6 * (1.0 - 2.0 * t) * 0.8 * en.noise_power * s0 / t).epsilon(1e-12));
    }
  }
}

TEST_CASE("throughput") {
  // t = 0.25 with gamma1 + gamma2 = 3.
  EnhancedChannels e;
  e.f0_hat = CVector::Constant(1, 1.0);
  HybridAction a;
  a.t = 0.25;
  a.w0 = a.w1 = CVector::Constant(1, 1.0);
  CHECK(throughput(e, a, LinkBudget{1.5, 0.6}) == doctest::Approx(0.5));
  CHECK(throughput(e, a, LinkBudget{1e-12, 0.6}) < 1e-10);

  const auto en = fixture::enhanced(7, 3, ModeVector{false, true, false});
  const LinkBudget lb{1.0, 0.6};
  std::mt19937_64 rng(4);
  HybridAction b;
  b.t = 0.2;
  b.w0 = fixture::random_unit(3, rng);
  b.w1 = fixture::random_unit(3, rng);
  auto caps = power_budgets(en, b.w0, b.t, lb);
  b.relay_powers = caps;
  b.relay_powers[1] *= 1.01;
  try {
    throughput(en, b, lb);
    FAIL("expected ConstraintViolation");
  } catch (const ConstraintViolation& v) {
    CHECK(v.relay_id() == en.active[1]);
  }
  b.relay_powers = caps;
  CHECK(throughput(en, b, lb) >= 0.0);

  // Dropping a constructively-adding relay never helps; monotone in p_t.
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const auto ek = fixture::enhanced(1000 + k, 3, ModeVector{false, false, false});
    HybridAction c;
    c.t = 0.05 + 0.4 * (k % 10) / 10.0;
    c.w0 = fixture::random_unit(3, rng);
    c.w1 = fixture::random_unit(3, rng);
    c.relay_powers = power_budgets(ek, c.w0, c.t, lb);
    const double full = throughput(ek, c, lb);
    for (int n = 0; n < 3; ++n) {
      const Complex yn = hdot(ek.f_hat[n], c.w1);
      Complex others = std::sqrt(lb.p_t) * ek.f0_hat.norm();
      for (int m = 0; m < 3; ++m)
        if (m != n) {
          const Complex ym = std::sqrt(lb.p_t) * hdot(ek.f_hat[m], c.w1);
          others += amplifier_coeff(c.relay_powers[m], ym) * ym * ek.g_hat[m];
        }
      // Constructive: the relay's term is in phase with the rest of the numerator
      // and the gain it adds outweighs its noise contribution.
      HybridAction d = c;
      d.relay_powers[n] = 0.0;
      const double without = throughput(ek, d, lb);
      const double term = amplifier_coeff(c.relay_powers[n], std::sqrt(lb.p_t) * yn) * std::abs(yn * ek.g_hat[n]);
      if ((std::conj(others) * yn * ek.g_hat[n]).real() > 0.0 && term > 0.0 && full >= without) ++checked;
      if ((std::conj(others) * yn * ek.g_hat[n]).real() > 0.0) CHECK(full >= without - 1e-12);
    }
    HybridAction hi = c;
    LinkBudget lb2{2.0, 0.6};
    hi.relay_powers = power_budgets(ek, c.w0, c.t, lb2);
    CHECK(throughput(ek, hi, lb2) >= full - 1e-12);
  }
  CHECK(checked > 0);
}

TEST_CASE("Rayleigh-quotient bound holds for random feasible actions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const ModeVector b = modes_from_index(static_cast<std::uint32_t>(k % 32), 5);
    const auto e = fixture::enhanced(20000 + k, 3, b, 30.0 + 10.0 * u(rng));
    const double pt = std::pow(10.0, -1.0 + 2.0 * u(rng));
    HybridAction a;
    a.t = 0.001 + 0.498 * u(rng);
    a.w0 = fixture::random_unit(3, rng);
    a.w1 = fixture::random_unit(3, rng);
    const LinkBudget lb{pt, 0.6};
    for (double c : power_budgets(e, a.w0, a.t, lb)) a.relay_powers.push_back(c * u(rng));
    const double lhs = snr_first_hop(e, a.w1, pt) + snr_second_hop(e, a.w1, pt, a.relay_powers);
    if (lhs > oracle::rayleigh_bound(e, a.w1, pt) * (1.0 + 1e-9)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("drive_relays stays within budget and beats full power") {
  std::mt19937_64 rng(6);
  const LinkBudget lb{1.0, 0.6};
  for (int k = 0; k < 100; ++k) {
    const auto e = fixture::enhanced(300 + k, 3, ModeVector{false, false, true, false, true});
    const CVector w0 = fixture::random_unit(3, rng), w1 = fixture::random_unit(3, rng);
    const double t = 0.05 + 0.004 * k;
    const RelayDrive d = drive_relays(e, w0, w1, t, lb);
    const auto caps = power_budgets(e, w0, t, lb);
    HybridAction a;
    a.t = t;
    a.w0 = w0;
    a.w1 = d.w1;
    a.relay_powers = d.powers;
    const double driven = throughput(e, a, lb);
    HybridAction full = a;
    full.w1 = w1;
    full.relay_powers = caps;
    CHECK(driven >= throughput(e, full, lb) - 1e-12);
    CHECK(std::abs(d.w1.norm() - 1.0) < 1e-12);
  }
}
