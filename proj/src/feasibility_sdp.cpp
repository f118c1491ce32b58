#include "hrelay/feasibility_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

namespace hrelay {

void FeasibilityInstance::validate() const {
  budget.validate();
  if (!(tau > 0.0 && tau <= 0.5)) throw DomainError("feasibility: tau outside (0, 1/2]");
  if (enh.antennas() < 1) throw StructuralError("feasibility: empty channels");
  for (const auto& f : enh.f_hat)
    if (f.size() != enh.antennas()) throw StructuralError("feasibility: relay channel size != K");
  if (enh.g_hat.size() != enh.f_hat.size()) throw StructuralError("feasibility: g_hat size");
}

double FeasibilityInstance::psi(int slot) const {
  return budget.eta * budget.p_t * enh.noise_power *
         std::norm(enh.g_hat[static_cast<std::size_t>(slot)]) * enh.f0_hat.squaredNorm();
}

double FeasibilityInstance::energy_coeff(int slot) const {
  return psi(slot) * (1.0 / tau - 2.0);
}

bool lmi_holds(double q, double s1, double p_t) { return q >= 0.0 && q >= p_t * s1 * s1; }

double lmi_cap(double energy, double p_t) {
  if (!(energy > 0.0)) return 0.0;
  return 2.0 * energy / (1.0 + std::sqrt(1.0 + 4.0 * p_t * energy));
}

double relaxation_sup(const EnhancedChannels& enh, double p_t) {
  CMatrix sum = enh.f0_hat * enh.f0_hat.adjoint();
  for (const auto& f : enh.f_hat) sum += f * f.adjoint();
  return p_t * enh.f0_hat.squaredNorm() + p_t * principal_eigvec(sum).value;
}

double rank1_objective(const FeasibilityInstance& inst, const CVector& w0, const CVector& w1) {
  const double p_t = inst.budget.p_t;
  double m = inst.enh.f0_hat.squaredNorm() + std::norm(hdot(inst.enh.f0_hat, w1));
  for (int n = 0; n < inst.enh.active_count(); ++n) {
    const CVector& f = inst.enh.f_hat[static_cast<std::size_t>(n)];
    const double s0 = std::norm(hdot(f, w0));
    m += std::min(std::norm(hdot(f, w1)), lmi_cap(inst.energy_coeff(n) * s0, p_t));
  }
  return p_t * m;
}

namespace {

// Real coordinates of a K x K Hermitian matrix: the K diagonal entries, then
// (Re, Im) of each strictly upper entry in row-major order. Coordinate a is
// the coefficient of a basis matrix E_a with one or two nonzero entries.
class HermitianCoords {
 public:
  explicit HermitianCoords(int k) : k_(k), dim_(k * k) {
    for (int i = 0; i < k; ++i) basis_.push_back({{i, i, 1.0}});
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        basis_.push_back({{i, j, 1.0}, {j, i, 1.0}});
        basis_.push_back({{i, j, Complex(0.0, 1.0)}, {j, i, Complex(0.0, -1.0)}});
      }
  }

  int dim() const { return dim_; }

  // Coefficients q with q^T x = f^H W(x) f.
  Eigen::VectorXd quad(const CVector& f) const {
    Eigen::VectorXd q(dim_);
    int idx = 0;
    for (int i = 0; i < k_; ++i) q(idx++) = std::norm(f(i));
    for (int i = 0; i < k_; ++i)
      for (int j = i + 1; j < k_; ++j) {
        const Complex c = std::conj(f(i)) * f(j);
        q(idx++) = 2.0 * c.real();
        q(idx++) = -2.0 * c.imag();
      }
    return q;
  }

  Eigen::VectorXd trace() const {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(dim_);
    q.head(k_).setOnes();
    return q;
  }

  CMatrix assemble(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    CMatrix w(k_, k_);
    int idx = 0;
    for (int i = 0; i < k_; ++i) w(i, i) = x(idx++);
    for (int i = 0; i < k_; ++i)
      for (int j = i + 1; j < k_; ++j) {
        w(i, j) = Complex(x(idx), x(idx + 1));
        w(j, i) = Complex(x(idx), -x(idx + 1));
        idx += 2;
      }
    return w;
  }

  Eigen::VectorXd coords(const CMatrix& w) const {
    Eigen::VectorXd x(dim_);
    int idx = 0;
    for (int i = 0; i < k_; ++i) x(idx++) = w(i, i).real();
    for (int i = 0; i < k_; ++i)
      for (int j = i + 1; j < k_; ++j) {
        x(idx++) = w(i, j).real();
        x(idx++) = w(i, j).imag();
      }
    return x;
  }

  // Adds -logdet W(x) to *value and, when grad is set, its gradient and
  // Hessian at offset `off`: d/dx_a = -tr(G E_a), d2/dx_a dx_b = tr(G E_a G E_b)
  // with G = W^-1. Returns false when W(x) is not positive definite.
  bool add_logdet(const Eigen::Ref<const Eigen::VectorXd>& x, int off, Eigen::VectorXd* grad,
                  Eigen::MatrixXd* hess, double* value) const {
    const CMatrix w = assemble(x);
    Eigen::LLT<CMatrix> llt(w);
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    for (int i = 0; i < k_; ++i) {
      const double d = llt.matrixL()(i, i).real();
      if (!(d > 0.0)) return false;
      logdet += 2.0 * std::log(d);
    }
    *value -= logdet;
    if (grad == nullptr) return true;
    const CMatrix g = llt.solve(CMatrix::Identity(k_, k_));
    for (int a = 0; a < dim_; ++a) {
      Complex tr = 0.0;
      for (const Entry& e : basis_[static_cast<std::size_t>(a)]) tr += e.coef * g(e.col, e.row);
      (*grad)(off + a) -= tr.real();
    }
    // tr(G E_a G E_b) = sum over entries (p,q,alpha) of E_a, (r,s,beta) of E_b
    // of alpha beta G(s,p) G(q,r).
    for (int a = 0; a < dim_; ++a)
      for (int b = a; b < dim_; ++b) {
        Complex h = 0.0;
        for (const Entry& ea : basis_[static_cast<std::size_t>(a)])
          for (const Entry& eb : basis_[static_cast<std::size_t>(b)])
            h += ea.coef * eb.coef * g(eb.col, ea.row) * g(ea.col, eb.row);
        (*hess)(off + a, off + b) += h.real();
        if (b != a) (*hess)(off + b, off + a) += h.real();
      }
    return true;
  }

 private:
  struct Entry {
    int row;
    int col;
    Complex coef;
  };
  int k_;
  int dim_;
  std::vector<std::vector<Entry>> basis_;
};

// h(x) = c + q^T x - quad * x[idx]^2, required > 0.
struct Slack {
  double c = 0.0;
  Eigen::VectorXd q;
  int idx = -1;
  double quad = 0.0;

  double eval(const Eigen::VectorXd& x) const {
    double h = c + q.dot(x);
    if (idx >= 0) h -= quad * x(idx) * x(idx);
    return h;
  }
};

// Log-barrier path following on
//   max  p_t (c0^T x1 + sum_n b_n u_n)
//   s.t. W0, W1 > 0, tr W0 < 1, tr W1 < 1,
//        b_n u_n < c_n^T x1,
//        b_n u_n (1 + p_t b_n u_n) < e_n c_n^T x0,
// where s_{n,1} = b_n u_n and b_n is the largest attainable s_{n,1}.
class BarrierProblem {
 public:
  BarrierProblem(const FeasibilityInstance& inst, const std::vector<int>& slots)
      : inst_(inst), slots_(slots), coords_(inst.enh.antennas()) {
    const int d = coords_.dim();
    const int n = static_cast<int>(slots.size());
    nv_ = 2 * d + n;
    const double p_t = inst.budget.p_t;
    const Eigen::VectorXd c0 = coords_.quad(inst.enh.f0_hat);

    double scale = inst.enh.f0_hat.squaredNorm();
    for (int i = 0; i < n; ++i) {
      const int s = slots[static_cast<std::size_t>(i)];
      const CVector& f = inst.enh.f_hat[static_cast<std::size_t>(s)];
      const double a = f.squaredNorm();
      const double e = inst.energy_coeff(s);
      const double b = std::min(a, lmi_cap(e * a, p_t));
      b_.push_back(b);
      e_.push_back(e);
      cn_.push_back(coords_.quad(f));
      scale += b;
    }
    scale_ = p_t * scale;

    objective_ = Eigen::VectorXd::Zero(nv_);
    objective_.segment(d, d) = (p_t / scale_) * c0;
    for (int i = 0; i < n; ++i) objective_(2 * d + i) = p_t * b_[static_cast<std::size_t>(i)] / scale_;

    auto linear = [&](double c) {
      Slack s;
      s.c = c;
      s.q = Eigen::VectorXd::Zero(nv_);
      return s;
    };
    Slack tr0 = linear(1.0);
    tr0.q.segment(0, d) = -coords_.trace();
    slacks_.push_back(tr0);
    Slack tr1 = linear(1.0);
    tr1.q.segment(d, d) = -coords_.trace();
    slacks_.push_back(tr1);
    for (int i = 0; i < n; ++i) {
      const double b = b_[static_cast<std::size_t>(i)];
      const Eigen::VectorXd& cn = cn_[static_cast<std::size_t>(i)];
      // Divided by b_n so every slack is O(1) in u.
      Slack link = linear(0.0);
      link.q.segment(d, d) = cn / b;
      link.q(2 * d + i) = -1.0;
      slacks_.push_back(link);
      Slack energy = linear(0.0);
      energy.q.segment(0, d) = (e_[static_cast<std::size_t>(i)] / b) * cn;
      energy.q(2 * d + i) = -1.0;
      energy.idx = 2 * d + i;
      energy.quad = p_t * b;
      slacks_.push_back(energy);
    }
    theta_ = 2.0 * inst.enh.antennas() + static_cast<double>(slacks_.size());
  }

  int size() const { return nv_; }
  double theta() const { return theta_; }
  double scale() const { return scale_; }
  const HermitianCoords& coords() const { return coords_; }

  Eigen::VectorXd initial_point() const {
    const int k = inst_.enh.antennas();
    const int d = coords_.dim();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(nv_);
    const Eigen::VectorXd half = coords_.coords(CMatrix::Identity(k, k) / (2.0 * k));
    x.segment(0, d) = half;
    x.segment(d, d) = half;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const double b = b_[i];
      const double upper = std::min(cn_[i].dot(half), lmi_cap(e_[i] * cn_[i].dot(half), inst_.budget.p_t));
      x(2 * d + static_cast<int>(i)) = 0.5 * upper / b;
    }
    return x;
  }

  double objective(const Eigen::VectorXd& x) const { return objective_.dot(x); }
  const Eigen::VectorXd& objective_vector() const { return objective_; }

  // Barrier value; +inf outside the domain. Gradient and Hessian when requested;
  // only the lower triangle of the Hessian is complete.
  double barrier(const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const int d = coords_.dim();
    if (grad != nullptr) {
      grad->setZero(nv_);
      hess->setZero(nv_, nv_);
    }
    double value = 0.0;
    if (!coords_.add_logdet(x.segment(0, d), 0, grad, hess, &value)) return kInf;
    if (!coords_.add_logdet(x.segment(d, d), d, grad, hess, &value)) return kInf;
    for (const Slack& s : slacks_) {
      const double h = s.eval(x);
      if (!(h > 0.0)) return kInf;
      value -= std::log(h);
      if (grad == nullptr) continue;
      dh_ = s.q;
      if (s.idx >= 0) dh_(s.idx) -= 2.0 * s.quad * x(s.idx);
      dh_ /= h;
      *grad -= dh_;
      hess->selfadjointView<Eigen::Lower>().rankUpdate(dh_);
      if (s.idx >= 0) (*hess)(s.idx, s.idx) += 2.0 * s.quad / h;
    }
    return value;
  }

  // Relaxed objective of the primal point with every s1 set to its largest
  // feasible value, plus the per-slot (s0, s1).
  double evaluate(const Eigen::VectorXd& x, std::vector<std::pair<double, double>>* s) const {
    const int d = coords_.dim();
    const double p_t = inst_.budget.p_t;
    const Eigen::VectorXd c0 = coords_.quad(inst_.enh.f0_hat);
    double m = inst_.enh.f0_hat.squaredNorm() + std::max(0.0, c0.dot(x.segment(d, d)));
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const double s0 = std::max(0.0, cn_[i].dot(x.segment(0, d)));
      const double s1 =
          std::max(0.0, std::min(cn_[i].dot(x.segment(d, d)), lmi_cap(e_[i] * s0, p_t)));
      m += s1;
      if (s != nullptr) (*s)[static_cast<std::size_t>(slots_[i])] = {s0, s1};
    }
    return p_t * m;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  const FeasibilityInstance& inst_;
  std::vector<int> slots_;
  HermitianCoords coords_;
  int nv_ = 0;
  double theta_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> b_;
  std::vector<double> e_;
  std::vector<Eigen::VectorXd> cn_;
  std::vector<Slack> slacks_;
  Eigen::VectorXd objective_;
  mutable Eigen::VectorXd dh_;
};

std::string trace_line(int outer, double t, int newton, double objective, double gap) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "outer %d: t=%.3e newton=%d objective=%.9g gap<=%.3e", outer, t,
                newton, objective, gap);
  return buf;
}

Eigen::VectorXd run_barrier(const BarrierProblem& prob, double base_value, double tol,
                            int max_newton, int* steps) {
  constexpr double kMu = 20.0;
  Eigen::VectorXd x = prob.initial_point();
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<std::string> trace;
  double t = 1.0;
  int total = 0;
  for (int outer = 0;; ++outer) {
    int inner = 0;
    for (;;) {
      const double phi = -t * prob.objective(x) + prob.barrier(x, &grad, &hess);
      const Eigen::VectorXd g = grad - t * prob.objective_vector();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      if (ldlt.info() != Eigen::Success) {
        trace.push_back(trace_line(outer, t, inner, prob.objective(x), prob.theta() / t));
        throw NumericalError("feasibility solver: singular Newton system", trace);
      }
      const Eigen::VectorXd dx = -ldlt.solve(g);
      const double dec2 = -g.dot(dx);
      if (!(dec2 >= 0.0) || !std::isfinite(dec2)) {
        trace.push_back(trace_line(outer, t, inner, prob.objective(x), prob.theta() / t));
        throw NumericalError("feasibility solver: indefinite Newton system", trace);
      }
      if (dec2 < 1e-10) break;
      double alpha = 1.0;
      bool moved = false;
      double val = phi;
      while (alpha > 1e-14) {
        const Eigen::VectorXd trial = x + alpha * dx;
        val = -t * prob.objective(trial) + prob.barrier(trial, nullptr, nullptr);
        if (std::isfinite(val) && val <= phi - 0.25 * alpha * dec2) {
          x = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++inner;
      ++total;
      // Roundoff floor: no step, or one that only shaves ulps off phi.
      if (!moved || phi - val <= 1e-12 * std::max(1.0, std::abs(phi))) break;
      if (total >= max_newton) {
        trace.push_back(trace_line(outer, t, inner, prob.objective(x), prob.theta() / t));
        throw NumericalError("feasibility solver: Newton step limit reached", trace);
      }
    }
    const double gap = prob.theta() / t;
    trace.push_back(trace_line(outer, t, inner, prob.objective(x), gap));
    const double target = 0.5 * tol * (base_value / prob.scale() + prob.objective(x));
    if (gap <= target) break;
    t *= kMu;
  }
  *steps = total;
  return x;
}

}  // namespace

CVector extract_rank1(const CHermitian& W, const std::function<double(const CVector&)>& score,
                      double relaxed, double tol, int samples, std::uint64_t seed) {
  if (!is_hermitian(W)) throw StructuralError("extract_rank1: matrix is not Hermitian");
  const int k = static_cast<int>(W.rows());
  const CMatrix sym = (W + W.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  CVector best = CVector::Zero(k);
  double best_score = score(best);
  auto consider = [&](const CVector& v) {
    const double n = v.norm();
    if (!(n > 0.0)) return;
    const CVector u = v / n;
    const double s = score(u);
    if (s > best_score) {
      best_score = s;
      best = u;
    }
  };
  consider(canonical_phase(es.eigenvectors().col(k - 1)));
  if (best_score >= relaxed - tol * std::abs(relaxed)) return best;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix factor = es.eigenvectors() * lambda.asDiagonal();
  for (int i = 0; i < samples; ++i) {
    CVector r(k);
    for (int j = 0; j < k; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      r(j) = Complex(re, im);
    }
    consider(factor * r);
  }
  return best;
}

FeasibilityResult solve_feasibility(const FeasibilityInstance& inst, const SolverOptions& opts) {
  inst.validate();
  const int k = inst.enh.antennas();
  const double p_t = inst.budget.p_t;
  const double direct = inst.enh.f0_hat.squaredNorm();

  // Relays with no energy or no incoming channel are pinned to s1 = 0.
  std::vector<int> slots;
  for (int n = 0; n < inst.enh.active_count(); ++n)
    if (inst.energy_coeff(n) > 0.0 && inst.enh.f_hat[static_cast<std::size_t>(n)].squaredNorm() > 0.0)
      slots.push_back(n);

  FeasibilityResult res;
  res.s_values.assign(static_cast<std::size_t>(inst.enh.active_count()), {0.0, 0.0});
  if (slots.empty()) {
    const CVector w = direct > 0.0 ? unit_align(inst.enh.f0_hat) : CVector(CVector::Unit(k, 0));
    res.W0 = w * w.adjoint();
    res.W1 = res.W0;
    res.m = 2.0 * p_t * direct;
    for (int n = 0; n < inst.enh.active_count(); ++n)
      res.s_values[static_cast<std::size_t>(n)].first =
          std::norm(hdot(inst.enh.f_hat[static_cast<std::size_t>(n)], w));
  } else {
    BarrierProblem prob(inst, slots);
    const Eigen::VectorXd x =
        run_barrier(prob, p_t * direct, opts.tol, opts.max_newton, &res.newton_steps);
    const int d = prob.coords().dim();
    res.W0 = prob.coords().assemble(x.segment(0, d));
    res.W1 = prob.coords().assemble(x.segment(d, d));
    res.m = prob.evaluate(x, &res.s_values);
  }
  if (!opts.extract) return res;

  const CVector w1_pc = canonical_phase(principal_eigvec(res.W1).vector);
  res.w0 = extract_rank1(
      res.W0, [&](const CVector& w) { return rank1_objective(inst, w, w1_pc); }, res.m, opts.tol,
      opts.randomization_samples, opts.seed);
  res.w1 = extract_rank1(
      res.W1, [&](const CVector& w) { return rank1_objective(inst, res.w0, w); }, res.m, opts.tol,
      opts.randomization_samples, opts.seed + 1);
  res.restored = rank1_objective(inst, res.w0, res.w1);
  res.rank1_gap = res.m - res.restored;
  return res;
}

double feasibility_oracle(const FeasibilityInstance& inst, int samples, std::uint64_t seed) {
  inst.validate();
  if (samples < 1) throw DomainError("feasibility_oracle: samples must be >= 1");
  const int k = inst.enh.antennas();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&]() {
    CVector v(k);
    for (int i = 0; i < k; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(i) = Complex(re, im);
    }
    const double n = v.norm();
    return n > 0.0 ? CVector(v / n) : CVector(CVector::Unit(k, 0));
  };
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const CVector w0 = draw();
    const CVector w1 = draw();
    best = std::max(best, rank1_objective(inst, w0, w1));
  }
  return best;
}

}  // namespace hrelay
