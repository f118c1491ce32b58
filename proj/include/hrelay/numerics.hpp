#pragma once

// Small complex linear-algebra helpers shared by the channel model, the
// SDP solver and the baselines. Dimensions here never exceed 2K+2.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>

#include "hrelay/errors.hpp"

namespace hrelay {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
// Conjugate-symmetric matrix; the invariant is checked by the functions that need it.
using CHermitian = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-10;

/// Returns a^H b (the first argument is conjugated).
template <typename DerivedA, typename DerivedB>
Complex hdot(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw StructuralError("hdot: dimension mismatch");
  return a.dot(b);
}

/// Returns f / ||f||.
template <typename Derived>
CVector unit_align(const Eigen::MatrixBase<Derived>& f) {
  const double norm = f.norm();
  if (!(norm > 0.0)) throw DegenerateInputError("unit_align: zero vector");
  return f / norm;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// True iff the smallest eigenvalue of the Hermitian matrix is >= -tol.
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, double tol) {
  if (!is_hermitian(m)) throw StructuralError("is_psd: matrix is not Hermitian");
  const CMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) >= -tol;
}

struct Eigenpair {
  double value;
  CVector vector;
};

/// Rotates v so its largest-magnitude entry is real and nonnegative.
inline CVector canonical_phase(CVector v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  const double mag = std::abs(v(idx));
  if (mag > 0.0) v *= std::conj(v(idx)) / mag;
  return v;
}

/// Largest eigenpair of a Hermitian matrix, with canonical global phase.
template <typename Derived>
Eigenpair principal_eigvec(const Eigen::MatrixBase<Derived>& m) {
  if (!is_hermitian(m)) throw StructuralError("principal_eigvec: matrix is not Hermitian");
  const CMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  const Eigen::Index last = sym.rows() - 1;
  return {es.eigenvalues()(last), canonical_phase(es.eigenvectors().col(last))};
}

/// Deterministic child seed (splitmix64 finalizer over both words).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hrelay
