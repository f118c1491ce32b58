#include "hrelay/monotonic_lb.hpp"

#include <algorithm>
#include <cmath>

namespace hrelay {

double vertex_value(const Vertex& v) { return v.t * std::log2(1.0 + v.gamma_bar); }

double gamma_max(const EnhancedChannels& enh, double p_t) {
  double sum = 2.0 * enh.f0_hat.squaredNorm();
  for (const auto& f : enh.f_hat) sum += f.squaredNorm();
  return p_t * sum;
}

const std::pair<const double, double>* FrontierCache::at_or_above(double tau) const {
  auto it = entries_.lower_bound(tau);
  return it == entries_.end() ? nullptr : &*it;
}

const std::pair<const double, double>* FrontierCache::at_or_below(double tau) const {
  auto it = entries_.upper_bound(tau);
  return it == entries_.begin() ? nullptr : &*std::prev(it);
}

Projection project(const Vertex& z, const EnhancedChannels& enh, const LinkBudget& budget,
                   double lambda_tol, const SolverOptions& solver, FrontierCache* cache) {
  if (!(lambda_tol > 0.0)) throw DomainError("project: lambda_tol must be > 0");
  if (!(z.t > 0.0 && z.t <= 0.5 && z.gamma_bar > 0.0))
    throw DomainError("project: vertex outside (0, 1/2] x (0, inf)");

  Projection out;
  // Feasibility of lambda*z: m(lambda t) >= lambda gamma_bar.
  auto test = [&](double lambda) {
    const double tau = lambda * z.t;
    const double need = lambda * z.gamma_bar;
    if (cache != nullptr) {
      if (const auto* above = cache->at_or_above(tau); above != nullptr && above->second >= need) {
        out.trace.push_back({lambda, above->second, true, false});
        return true;
      }
      if (const auto* below = cache->at_or_below(tau); below != nullptr && below->second < need) {
        out.trace.push_back({lambda, below->second, false, false});
        return false;
      }
    }
    FeasibilityResult r = solve_feasibility(FeasibilityInstance{enh, budget, tau}, solver);
    const bool ok = r.m >= need;
    out.trace.push_back({lambda, r.m, ok, true});
    if (cache != nullptr) cache->insert(tau, r.m);
    out.solves_made.push_back(std::move(r));
    out.solve_taus.push_back(tau);
    return ok;
  };

  if (test(1.0)) {
    out.lambda = out.lambda_infeasible = 1.0;
    out.o = z;
    return out;
  }
  // m(tau) <= sup_tau m(tau), so nothing above sup/gamma_bar is feasible.
  double lo = 0.0;
  double hi = std::min(1.0, relaxation_sup(enh, budget.p_t) / z.gamma_bar);
  // The value at tau = t certifies every lambda up to m(t)/gamma_bar.
  const double m_top = out.trace.back().m;
  if (out.trace.back().solved) lo = std::min(hi, m_top / z.gamma_bar);
  while (hi - lo > lambda_tol) {
    const double mid = 0.5 * (lo + hi);
    if (test(mid)) lo = mid;
    else hi = mid;
  }
  out.lambda = lo;
  out.lambda_infeasible = hi;
  out.o = {lo * z.t, lo * z.gamma_bar};
  return out;
}

namespace {

bool dominated_by(const Vertex& a, const Vertex& b) {
  return a.t <= b.t && a.gamma_bar <= b.gamma_bar;
}

// Index of the vertex with the largest r; ties go to smaller t, then smaller gamma_bar.
std::size_t best_vertex(const std::vector<Vertex>& vs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    const double a = vertex_value(vs[i]);
    const double b = vertex_value(vs[best]);
    if (a > b || (a == b && (vs[i].t < vs[best].t ||
                             (vs[i].t == vs[best].t && vs[i].gamma_bar < vs[best].gamma_bar))))
      best = i;
  }
  return best;
}

}  // namespace

Polyblock cut(Polyblock poly, const Vertex& z, const Vertex& o) {
  if (o.t > z.t || o.gamma_bar > z.gamma_bar) throw DomainError("cut: o must lie below z");
  std::vector<Vertex> next;
  for (const Vertex& v : poly.vertices) {
    const bool above = v.t > o.t && v.gamma_bar > o.gamma_bar;
    if (v == z && o == z) continue;
    if (v == z || above) {
      next.push_back({o.t, v.gamma_bar});
      next.push_back({v.t, o.gamma_bar});
    } else {
      next.push_back(v);
    }
  }
  std::vector<Vertex> kept;
  for (std::size_t i = 0; i < next.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < next.size() && !drop; ++j) {
      if (i == j) continue;
      if (next[i] == next[j]) drop = j < i;
      else drop = dominated_by(next[i], next[j]);
    }
    if (!drop) kept.push_back(next[i]);
  }
  poly.vertices = std::move(kept);
  poly.r_upper = poly.vertices.empty() ? 0.0 : vertex_value(poly.vertices[best_vertex(poly.vertices)]);
  return poly;
}

namespace {

void realize(const EnhancedChannels& enh, const LinkBudget& budget, double t, const CVector& w0,
             const CVector& w1, CVector* w1_exec, std::vector<double>* powers, double* achieved) {
  RelayDrive drive = drive_relays(enh, w0, w1, t, budget);
  HybridAction a;
  a.t = t;
  a.w0 = w0;
  a.w1 = drive.w1;
  a.relay_powers = drive.powers;
  *achieved = throughput(enh, a, budget);
  *w1_exec = std::move(drive.w1);
  *powers = std::move(drive.powers);
}

}  // namespace

LowerBoundResult solve_lower_bound(const EnhancedChannels& enh, const LinkBudget& budget,
                                   const LowerBoundOptions& opts) {
  budget.validate();
  if (!(opts.eps > 0.0)) throw DomainError("solve_lower_bound: eps must be > 0");
  if (opts.max_iter < 1) throw DomainError("solve_lower_bound: max_iter must be >= 1");
  const int k = enh.antennas();
  const double direct = enh.f0_hat.squaredNorm();

  LowerBoundResult res;
  if (enh.active_count() == 0 || !(direct > 0.0)) {
    // Relays cannot contribute: the whole slot goes to the two hops.
    res.t_opt = 0.5;
    res.w1_opt = direct > 0.0 ? unit_align(enh.f0_hat) : CVector(CVector::Unit(k, 0));
    res.w0_opt = res.w1_opt;
    res.value = 0.5 * std::log2(1.0 + 2.0 * budget.p_t * direct);
    res.r_upper = res.r_lower = res.value;
    res.converged = true;
    realize(enh, budget, res.t_opt, res.w0_opt, res.w1_opt, &res.w1_exec, &res.relay_powers,
            &res.achieved);
    return res;
  }

  Polyblock poly;
  poly.vertices = {{0.5, gamma_max(enh, budget.p_t)}};
  poly.r_upper = vertex_value(poly.vertices.front());
  double best_witness = -1.0;
  FrontierCache cache;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Vertex z = poly.vertices[best_vertex(poly.vertices)];
    poly.r_upper = vertex_value(z);
    res.upper_history.push_back(poly.r_upper);
    res.lower_history.push_back(poly.r_lower);
    if (poly.r_upper - poly.r_lower <= opts.eps) {
      res.converged = true;
      break;
    }
    ++res.iterations;
    Projection proj = project(z, enh, budget, opts.lambda_tol, opts.solver, &cache);
    // Every solve certifies the point (tau, m(tau)) and a rank-1 witness at tau.
    for (std::size_t i = 0; i < proj.solves_made.size(); ++i) {
      const FeasibilityResult& sol = proj.solves_made[i];
      const double tau = proj.solve_taus[i];
      ++res.solves;
      poly.r_lower = std::max(poly.r_lower, tau * std::log2(1.0 + sol.m));
      const double witness = tau * std::log2(1.0 + sol.restored);
      if (witness > best_witness) {
        best_witness = witness;
        res.value = witness;
        res.t_opt = tau;
        res.w0_opt = sol.w0;
        res.w1_opt = sol.w1;
      }
    }

    if (proj.lambda == 1.0) {
      poly = cut(std::move(poly), z, z);
    } else {
      // Cut at the smallest point known to be infeasible so the polyblock
      // keeps containing the feasible set; at lambda_infeasible == 1 that
      // point is z itself and the feasible end is used instead.
      const Vertex y = proj.lambda_infeasible < 1.0
                           ? Vertex{proj.lambda_infeasible * z.t, proj.lambda_infeasible * z.gamma_bar}
                           : proj.o;
      poly = cut(std::move(poly), z, y);
    }
    if (poly.vertices.empty()) {
      poly.r_upper = poly.r_lower;
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    const Vertex z = poly.vertices[best_vertex(poly.vertices)];
    poly.r_upper = vertex_value(z);
    res.converged = poly.r_upper - poly.r_lower <= opts.eps;
  }
  res.r_upper = poly.r_upper;
  res.r_lower = poly.r_lower;
  res.gap = poly.r_upper - poly.r_lower;
  realize(enh, budget, res.t_opt, res.w0_opt, res.w1_opt, &res.w1_exec, &res.relay_powers,
          &res.achieved);
  return res;
}

FixedTResult solve_fixed_t(const EnhancedChannels& enh, const LinkBudget& budget, double t,
                           const SolverOptions& solver) {
  if (!(t >= kTMin && t <= 0.5 - kTMin)) throw DomainError("solve_fixed_t: t outside [t_min, 1/2 - t_min]");
  FeasibilityInstance inst{enh, budget, t};
  const FeasibilityResult r = solve_feasibility(inst, solver);
  FixedTResult out;
  out.value = t * std::log2(1.0 + r.m);
  out.restored = t * std::log2(1.0 + r.restored);
  out.w0 = r.w0;
  out.w1 = r.w1;
  realize(enh, budget, t, out.w0, out.w1, &out.w1_exec, &out.relay_powers, &out.achieved);
  return out;
}

}  // namespace hrelay
