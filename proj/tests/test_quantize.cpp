#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qbnf/error.hpp"
#include "qbnf/quantize.hpp"
#include "qbnf/symbol.hpp"
#include "support.hpp"

using namespace qbnf;

namespace {

const Complex kI{0.0, 1.0};

Monomial mono(int twice_mode, int tau, int x, int xi, int j = 0) {
  Monomial m;
  m.twice_mode = twice_mode;
  m.tau_power = tau;
  m.x_pow = {x, 0};
  m.xi_pow = {xi, 0};
  m.h_power = j;
  return m;
}

Monomial mono2(std::array<int, 2> x, std::array<int, 2> xi, int j = 0) {
  Monomial m;
  m.x_pow = x;
  m.xi_pow = xi;
  m.h_power = j;
  return m;
}

}  // namespace

TEST_SUITE("quantize") {
  TEST_CASE("position and momentum are canonical on interior levels") {
    const double h = 0.1;
    const int L = 12;
    const Eigen::MatrixXcd y = weyl_monomial(1, 0, L, h);
    const Eigen::MatrixXcd eta = weyl_monomial(0, 1, L, h);
    const Eigen::MatrixXcd c = y * eta - eta * y;
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) CHECK(std::abs(c(i, j) - (i == j ? kI * h : 0.0)) < 1e-15);
    CHECK((y - y.adjoint()).norm() < 1e-15);
    CHECK((eta - eta.adjoint()).norm() < 1e-15);
  }

  TEST_CASE("harmonic oscillator is diagonal with spectrum (l + 1/2) h") {
    const double h = 0.05;
    const Eigen::MatrixXcd H = 0.5 * (weyl_monomial(2, 0, 10, h) + weyl_monomial(0, 2, 10, h));
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) CHECK(std::abs(H(i, j) - (i == j ? (i + 0.5) * h : 0.0)) < 1e-15);
  }

  TEST_CASE("Weyl ordering of y eta is the symmetric product") {
    const double h = 0.2;
    const Eigen::MatrixXcd y = weyl_monomial(1, 0, 14, h);
    const Eigen::MatrixXcd eta = weyl_monomial(0, 1, 14, h);
    const Eigen::MatrixXcd w = weyl_monomial(1, 1, 10, h);
    const Eigen::MatrixXcd s = (0.5 * (y * eta + eta * y)).topLeftCorner(11, 11);
    CHECK((w - s).norm() < 1e-14);
  }

  TEST_CASE("metaplectic substitution sends x xi to (y^2 + eta^2)/2i") {
    const PhaseSpec sp = PhaseSpec::cylinder(4);
    const FormalSymbol s = metaplectic_substitute(FormalSymbol::term(sp, mono(0, 0, 1, 1)));
    FormalSymbol expect(sp);
    expect.add(mono(0, 0, 2, 0), -0.5 * kI);
    expect.add(mono(0, 0, 0, 2), -0.5 * kI);
    CHECK(distance(s, expect) < 1e-15);
  }

  TEST_CASE("complex scaling rotates the first pair") {
    const PhaseSpec sp = PhaseSpec::plane(2, 4);
    FormalSymbol s(sp);
    s.add(mono2({2, 0}, {0, 0}), 1.0);
    s.add(mono2({0, 0}, {2, 0}), 1.0);
    s.add(mono2({0, 2}, {0, 0}), 1.0);
    s.add(mono2({1, 0}, {0, 0}), 1.0);
    const FormalSymbol c = complex_scale(s);
    CHECK(std::abs(c.coefficient(mono2({2, 0}, {0, 0})) - kI) < 1e-16);
    CHECK(std::abs(c.coefficient(mono2({0, 0}, {2, 0})) + kI) < 1e-16);
    CHECK(std::abs(c.coefficient(mono2({0, 2}, {0, 0})) - 1.0) < 1e-16);
    CHECK(std::abs(c.coefficient(mono2({1, 0}, {0, 0})) - std::polar(1.0, std::numbers::pi / 4)) < 1e-15);
  }

  TEST_CASE("unperturbed cylinder is diagonal with the closed-form spectrum") {
    for (bool orientable : {true, false}) {
      const double h = 0.1, S = 0.7;
      const PhaseSpec sp = PhaseSpec::cylinder(4, orientable);
      FormalSymbol p(sp);
      p.add(mono(0, 1, 0, 0), 1.0);
      p.add(mono(0, 0, 1, 1), 1.0);
      const BasisSpec b = BasisSpec::cylinder(-3, 3, 8, h, S, orientable);
      const Eigen::MatrixXcd M = assemble_cylinder(metaplectic_substitute(p), b).matrix;
      for (int i = 0; i < b.dimension(); ++i) {
        const auto [k, l] = b.label(i);
        const double tau = (orientable ? h * k : h * (k + 0.5 * l)) - S / (2.0 * std::numbers::pi);
        CHECK(std::abs(M(i, i) - Complex{tau, -(l + 0.5) * h}) < 1e-15);
        for (int j = 0; j < b.dimension(); ++j)
          if (j != i) CHECK(M(i, j) == Complex{0.0});
      }
    }
  }

  TEST_CASE("Fourier modes act by the midpoint rule") {
    // Op(e^{it} tau) e^{ikt} = (h k + h/2) e^{i(k+1)t}.
    const double h = 0.1;
    const PhaseSpec sp = PhaseSpec::cylinder(4);
    const BasisSpec b = BasisSpec::cylinder(-2, 2, 0, h, 0.0, true);
    const Eigen::MatrixXcd M = assemble_cylinder(FormalSymbol::term(sp, mono(2, 1, 0, 0)), b).matrix;
    for (int k = -2; k < 2; ++k) CHECK(std::abs(M(b.index(k + 1, 0), b.index(k, 0)) - (h * k + 0.5 * h)) < 1e-15);
  }

  TEST_CASE("assembly is a homomorphism on interior blocks") {
    std::mt19937_64 rng(31);
    const test::RandomShape shape{3, 2, 2, 1, 1};
    for (int n = 0; n < 6; ++n) {
      const bool orientable = n % 2 == 0;
      const PhaseSpec sp = PhaseSpec::cylinder(30, orientable, 30);
      const FormalSymbol a = test::random_symbol(sp, rng, shape);
      const FormalSymbol c = test::random_symbol(sp, rng, shape);
      const BasisSpec b = BasisSpec::cylinder(-6, 6, 12, 0.1, 0.3, orientable);
      const double d = test::interior_defect(assemble_cylinder(a, b).matrix, assemble_cylinder(c, b).matrix,
                                             assemble_cylinder(moyal_star(a, c), b).matrix, b,
                                             test::level_reach(a) + test::level_reach(c),
                                             test::mode_reach(a) + test::mode_reach(c));
      CHECK(d < 1e-12);
    }
    const PhaseSpec sp = PhaseSpec::plane(2, 30);
    for (int n = 0; n < 4; ++n) {
      const FormalSymbol a = test::random_symbol(sp, rng, shape);
      const FormalSymbol c = test::random_symbol(sp, rng, shape);
      const BasisSpec b = BasisSpec::saddle(10, 10, 0.1);
      const double d = test::interior_defect(assemble_saddle(a, b).matrix, assemble_saddle(c, b).matrix,
                                             assemble_saddle(moyal_star(a, c), b).matrix, b,
                                             test::level_reach(a) + test::level_reach(c), 0);
      CHECK(d < 1e-12);
    }
  }

  TEST_CASE("moyal conjugation is matrix conjugation by exp(-iA/h)") {
    // One pair (levels2 = 0): P = (xi^2 + x^2)/2 + 0.1 x^3 and A/h = 0.3 xi.
    const double h = 0.1;
    const PhaseSpec sp = PhaseSpec::plane(2, 12);
    FormalSymbol P(sp);
    P.add(mono2({2, 0}, {0, 0}), 0.5);
    P.add(mono2({0, 0}, {2, 0}), 0.5);
    P.add(mono2({3, 0}, {0, 0}), 0.1);
    FormalSymbol A(sp);
    A.add(mono2({0, 0}, {1, 0}, 1), 0.3);  // A = 0.3 h xi: a translation in x
    const FormalSymbol Q = moyal_conjugate(P, A);
    const int L = 60, keep = 12;
    const BasisSpec big = BasisSpec::saddle(L, 0, h);
    const Eigen::MatrixXcd Pm = assemble_saddle(P, big).matrix;
    const Eigen::MatrixXcd Xi = assemble_saddle(FormalSymbol::term(sp, mono2({0, 0}, {1, 0})), big).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Xi);
    const Eigen::VectorXcd phase = (Complex{0.0, -0.3} * es.eigenvalues().cast<Complex>()).array().exp();
    const Eigen::MatrixXcd U = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    // e^{-iA/h} P e^{iA/h}
    const Eigen::MatrixXcd C = U * Pm * U.adjoint();
    const Eigen::MatrixXcd Qm = assemble_saddle(Q, big).matrix;
    const double scale = Qm.topLeftCorner(keep, keep).cwiseAbs().maxCoeff();
    CHECK((C - Qm).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() < 1e-10 * scale);
    // The opposite sign fails.
    const Eigen::MatrixXcd Cw = U.adjoint() * Pm * U;
    CHECK((Cw - Qm).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() > 1e-4 * scale);
  }

  TEST_CASE("basis validation") {
    CHECK_THROWS_AS(BasisSpec::cylinder(3, 2, 4, 0.1, 0.0, true), ConfigError);
    CHECK_THROWS_AS(BasisSpec::saddle(-1, 2, 0.1), ConfigError);
    CHECK_THROWS_AS(BasisSpec::saddle(100, 100, 0.1), DimensionError);
    CHECK_THROWS_AS(BasisSpec::saddle(4, 4, 0.0), ConfigError);
    const BasisSpec b = BasisSpec::cylinder(-2, 2, 4, 0.1, 0.0, true);
    CHECK(b.dimension() == 25);
    for (int i = 0; i < b.dimension(); ++i) CHECK(b.index(b.label(i)[0], b.label(i)[1]) == i);
    const BasisSpec e = b.enlarged(10, 5);
    CHECK(e.k_min == -7);
    CHECK(e.k_max == 7);
    CHECK(e.levels == 14);
  }

  TEST_CASE("orientability mismatch is rejected") {
    const PhaseSpec sp = PhaseSpec::cylinder(4, false);
    const BasisSpec b = BasisSpec::cylinder(-1, 1, 2, 0.1, 0.0, true);
    CHECK_THROWS_AS(assemble_cylinder(FormalSymbol::term(sp, mono(0, 1, 0, 0)), b), SpecError);
  }
}
