#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's SNR, budget or solver code; only its data types are shared.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "hrelay/network_model.hpp"

namespace oracle {

using hrelay::Complex;
using hrelay::CVector;
using hrelay::EnhancedChannels;

inline Complex inner(const CVector& a, const CVector& b) {
  Complex s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a(i)) * b(i);
  return s;
}

inline double sq(const CVector& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::norm(v(i));
  return s;
}

inline double gamma1(const EnhancedChannels& e, const CVector& w1, double pt) {
  return pt * std::norm(inner(e.f0_hat, w1));
}

// Second-hop SNR written straight from the two-hop AF expression.
inline double gamma2(const EnhancedChannels& e, const CVector& w1, double pt, const std::vector<double>& p) {
  Complex num = std::sqrt(pt) * std::sqrt(sq(e.f0_hat));
  double den = 1.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const Complex y = std::sqrt(pt) * inner(e.f_hat[n], w1);
    const double x = std::sqrt(p[n] / (1.0 + std::norm(y)));
    num += x * y * e.g_hat[n];
    den += std::norm(x * e.g_hat[n]);
  }
  return std::norm(num) / den;
}

inline double budget(const EnhancedChannels& e, std::size_t slot, const CVector& w0, double t, double eta,
                     double pt) {
  return eta * (1.0 / t - 2.0) * pt * e.noise_power * std::norm(inner(e.f_hat[slot], w0));
}

// Right-hand side of the Rayleigh-quotient bound.
inline double rayleigh_bound(const EnhancedChannels& e, const CVector& w1, double pt) {
  double s = sq(e.f0_hat) + std::norm(inner(e.f0_hat, w1));
  for (const auto& f : e.f_hat) s += std::norm(inner(f, w1));
  return pt * s;
}

// Unit vector in C^2 up to global phase: (cos a, sin a e^{j phi}).
inline CVector sphere2(double a, double phi) {
  CVector w(2);
  w << Complex(std::cos(a), 0.0), std::polar(std::sin(a), phi);
  return w;
}

inline double cap_root(double rhs, double pt) {
  // Largest s with s (1 + pt s) <= rhs.
  if (rhs <= 0.0) return 0.0;
  return (-1.0 + std::sqrt(1.0 + 4.0 * pt * rhs)) / (2.0 * pt);
}

struct GridSpec {
  int nt = 200;
  int na = 100;
  int nphi = 100;
};

// Grid over the hop-time domain (0, 1/2], endpoint included.
inline double t_at(int i, int nt) {
  const double lo = 1e-3;
  const double hi = 0.5;
  return nt == 1 ? hi : lo + (hi - lo) * i / (nt - 1);
}

// Lower-bound objective t log2(1 + pt||f0||^2 + pt|f0^H w1|^2 + pt s1) for a
// single active relay and K = 2, maximized over a (t, w1) grid. The energy
// beamformer only enters through |f1^H w0|^2, maximized by alignment.
inline double lb_objective_grid(const EnhancedChannels& e, double pt, double eta, GridSpec g = {}) {
  const double f0 = sq(e.f0_hat);
  const double psi = eta * pt * e.noise_power * std::norm(e.g_hat[0]) * f0;
  const double s0 = sq(e.f_hat[0]);
  double best = 0.0;
  for (int ia = 0; ia < g.na; ++ia)
    for (int ip = 0; ip < g.nphi; ++ip) {
      const CVector w1 = sphere2(0.5 * M_PI * ia / (g.na - 1), 2.0 * M_PI * ip / g.nphi);
      const double d = std::norm(inner(e.f0_hat, w1));
      const double y = std::norm(inner(e.f_hat[0], w1));
      for (int it = 0; it < g.nt; ++it) {
        const double t = t_at(it, g.nt);
        const double s1 = std::min(y, cap_root(psi * (1.0 / t - 2.0) * s0, pt));
        best = std::max(best, t * std::log2(1.0 + pt * (f0 + d + s1)));
      }
    }
  return best;
}

// max over x in [0, xm] of |A + x c|^2 / (1 + d x^2): coarse grid then golden refinement.
inline double best_ratio(Complex A, Complex c, double d, double xm) {
  auto f = [&](double x) { return std::norm(A + x * c) / (1.0 + d * x * x); };
  const int n = 24;
  int bi = 0;
  double bv = f(0.0);
  for (int i = 1; i <= n; ++i) {
    const double v = f(xm * i / n);
    if (v > bv) {
      bv = v;
      bi = i;
    }
  }
  double lo = xm * std::max(0, bi - 1) / n;
  double hi = xm * std::min(n, bi + 1) / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int k = 0; k < 40; ++k) {
    const double a = hi - r * (hi - lo);
    const double b = lo + r * (hi - lo);
    if (f(a) >= f(b)) hi = b;
    else lo = a;
  }
  return std::max(bv, f(0.5 * (lo + hi)));
}

// Problem (4) value for one active relay (K = 2) at given (t, w1), with the
// relay power searched over [0, budget] and w0 aligned to the relay.
inline double problem4_single_at(const EnhancedChannels& e, double pt, double eta, double t, const CVector& w1) {
  const double P = eta * (1.0 / t - 2.0) * pt * e.noise_power * sq(e.f_hat[0]);
  const Complex y = std::sqrt(pt) * inner(e.f_hat[0], w1);
  const double xm = std::sqrt(P / (1.0 + std::norm(y)));
  const Complex A = std::sqrt(pt) * std::sqrt(sq(e.f0_hat));
  const double g2 = best_ratio(A, y * e.g_hat[0], std::norm(e.g_hat[0]), xm);
  return t * std::log2(1.0 + gamma1(e, w1, pt) + g2);
}

// Grid estimate of the problem-(4) optimum followed by a shrinking pattern
// search around the best grid point.
inline double problem4_single(const EnhancedChannels& e, double pt, double eta, GridSpec g = {60, 48, 48}) {
  double best = -1.0;
  double bt = 0.25, ba = 0.0, bp = 0.0;
  for (int it = 0; it < g.nt; ++it)
    for (int ia = 0; ia < g.na; ++ia)
      for (int ip = 0; ip < g.nphi; ++ip) {
        const double t = t_at(it, g.nt);
        const double a = 0.5 * M_PI * ia / (g.na - 1);
        const double phi = 2.0 * M_PI * ip / g.nphi;
        const double v = problem4_single_at(e, pt, eta, t, sphere2(a, phi));
        if (v > best) {
          best = v;
          bt = t;
          ba = a;
          bp = phi;
        }
      }
  double st = 0.5 / g.nt, sa = M_PI / g.na, sp = 2.0 * M_PI / g.nphi;
  for (int round = 0; round < 60; ++round) {
    bool moved = false;
    for (int dim = 0; dim < 3; ++dim)
      for (int sgn : {-1, 1}) {
        double t = bt, a = ba, phi = bp;
        if (dim == 0) t = std::clamp(bt + sgn * st, 1e-3, 0.5);
        if (dim == 1) a = std::clamp(ba + sgn * sa, 0.0, 0.5 * M_PI);
        if (dim == 2) phi = bp + sgn * sp;
        const double v = problem4_single_at(e, pt, eta, t, sphere2(a, phi));
        if (v > best) {
          best = v;
          bt = t;
          ba = a;
          bp = phi;
          moved = true;
        }
      }
    if (!moved) {
      st *= 0.5;
      sa *= 0.5;
      sp *= 0.5;
    }
  }
  return best;
}

// Largest eigenpair by power iteration on M + shift I.
inline std::pair<double, CVector> power_iteration(const hrelay::CMatrix& m, int iters = 20000) {
  const Eigen::Index n = m.rows();
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) shift += m.row(i).cwiseAbs().sum();
  const hrelay::CMatrix s = m + shift * hrelay::CMatrix::Identity(n, n);
  CVector v = CVector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) v(i) *= std::polar(1.0, 0.37 * static_cast<double>(i + 1));
  for (int k = 0; k < iters; ++k) {
    v = s * v;
    v /= v.norm();
  }
  return {(v.adjoint() * m * v)(0, 0).real(), v};
}

}  // namespace oracle
