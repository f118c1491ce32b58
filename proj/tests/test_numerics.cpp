#include <doctest.h>

#include <random>

#include "hrelay/numerics.hpp"
#include "oracles.hpp"

using namespace hrelay;

namespace {

CVector random_cvector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(d(rng), d(rng));
  return v;
}

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  CMatrix a(n, n);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(d(rng), d(rng));
  return (a + a.adjoint()) / 2.0;
}

const Complex I(0.0, 1.0);

}  // namespace

TEST_CASE("hdot conjugates its first argument") {
  CVector a(2), b(2);
  a << 1.0, I;
  b << 1.0, -I;
  CHECK(std::abs(hdot(a, b)) < 1e-15);
  CVector c(2);
  c << 3.0, 4.0 * I;
  CHECK(hdot(c, c).real() == doctest::Approx(25.0));
  CHECK(hdot(c, c).imag() == doctest::Approx(0.0));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const CVector x = random_cvector(3, rng), y = random_cvector(3, rng);
    CHECK(std::abs(hdot(x, y) - oracle::inner(x, y)) < 1e-12);
    CHECK(std::abs(hdot(x, y) - std::conj(hdot(y, x))) < 1e-12);
  }
  CHECK_THROWS_AS(hdot(CVector(2), CVector(3)), StructuralError);
}

TEST_CASE("unit_align") {
  CVector f(2);
  f << 3.0, 4.0 * I;
  const CVector u = unit_align(f);
  CHECK(std::abs(u(0) - Complex(0.6, 0.0)) < 1e-15);
  CHECK(std::abs(u(1) - Complex(0.0, 0.8)) < 1e-15);
  CHECK((unit_align(u) - u).norm() < 1e-15);
  CHECK_THROWS_AS(unit_align(CVector::Zero(3).eval()), DegenerateInputError);

  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const CVector g = random_cvector(4, rng);
    const CVector w = unit_align(g);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(hdot(w, g)) - g.norm()) < 1e-12 * g.norm());
  }
}

TEST_CASE("is_psd") {
  CMatrix a(2, 2);
  a << 1.0, 2.0, 2.0, 1.0;
  CHECK_FALSE(is_psd(a, 1e-12));
  CHECK(is_psd(CMatrix::Identity(3, 3).eval(), 1e-12));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const CVector w = random_cvector(1 + k % 5, rng);
    CHECK(is_psd((w * w.adjoint()).eval(), 1e-10));
    CMatrix m = (w * w.adjoint()).eval();
    m(0, 0) = -0.1;
    CHECK_FALSE(is_psd(m, 1e-12));
  }
  CMatrix nh(2, 2);
  nh << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(is_psd(nh, 1e-12), StructuralError);
}

TEST_CASE("principal_eigvec") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  const Eigenpair p = principal_eigvec(d);
  CHECK(p.value == doctest::Approx(3.0));
  CHECK(std::abs(std::abs(p.vector(0)) - 1.0) < 1e-12);

  std::mt19937_64 rng(4);
  const CVector w = unit_align(random_cvector(3, rng));
  const Eigenpair q = principal_eigvec((w * w.adjoint()).eval());
  CHECK(q.value == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(hdot(q.vector, w)) - 1.0) < 1e-12);

  // Canonical phase: largest-magnitude entry real and nonnegative.
  Eigen::Index idx = 0;
  q.vector.cwiseAbs().maxCoeff(&idx);
  CHECK(std::abs(q.vector(idx).imag()) < 1e-14);
  CHECK(q.vector(idx).real() >= 0.0);

  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 6;
    const CMatrix m = random_hermitian(n, rng);
    const Eigenpair e = principal_eigvec(m);
    CHECK((m * e.vector - e.value * e.vector).norm() < 1e-8 * std::max(1.0, m.norm()));
  }
  for (int k = 0; k < 20; ++k) {
    const CMatrix m = random_hermitian(3, rng);
    const auto [lambda, v] = oracle::power_iteration(m);
    CHECK(principal_eigvec(m).value == doctest::Approx(lambda).epsilon(1e-6));
  }
}
