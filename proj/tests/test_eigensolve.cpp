#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qbnf/eigensolve.hpp"
#include "support.hpp"

using namespace qbnf;

namespace {

void sort_lex(std::vector<Complex>& v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

void check_certificates(const Eigen::MatrixXcd& M, const Spectrum& s) {
  REQUIRE(s.eigenvalues.size() == static_cast<std::size_t>(M.rows()));
  CHECK(s.norm == doctest::Approx(M.norm()));
  for (double r : s.residuals) CHECK(r <= 1e-8 * s.norm);
  Complex sum{0.0};
  for (Complex z : s.eigenvalues) sum += z;
  CHECK(std::abs(sum - M.trace()) <= 1e-8 * M.rows() * s.norm);
}

}  // namespace

TEST_SUITE("eigensolve") {
  TEST_CASE("triangular and diagonal matrices") {
    Eigen::MatrixXcd T(2, 2);
    T << 1.0, 2.0, 0.0, 3.0;
    Spectrum s = eigenvalues(T);
    sort_lex(s.eigenvalues);
    CHECK(std::abs(s.eigenvalues[0] - 1.0) < 1e-14);
    CHECK(std::abs(s.eigenvalues[1] - 3.0) < 1e-14);
    const Eigen::MatrixXcd D = Eigen::VectorXcd::LinSpaced(6, 1.0, 6.0).asDiagonal();
    Spectrum d = eigenvalues(D);
    sort_lex(d.eigenvalues);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(d.eigenvalues[i] - double(i + 1)) < 1e-15);
  }

  TEST_CASE("companion matrix recovers polynomial roots") {
    // Roots 1, -2, i, 0.5 - 0.25i.
    const std::vector<Complex> roots{1.0, -2.0, Complex{0.0, 1.0}, Complex{0.5, -0.25}};
    std::vector<Complex> c{1.0};
    for (Complex r : roots) {
      std::vector<Complex> next(c.size() + 1, 0.0);
      for (std::size_t i = 0; i < c.size(); ++i) {
        next[i] += c[i];
        next[i + 1] -= r * c[i];
      }
      c = next;
    }
    const int n = static_cast<int>(roots.size());
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) C(0, i) = -c[i + 1];
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    const Spectrum s = eigenvalues(C);
    CHECK(test::hausdorff_one_sided(roots, s.eigenvalues) < 1e-12);
    check_certificates(C, s);
  }

  TEST_CASE("spectrum is invariant under unitary similarity") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 30;
      Eigen::MatrixXcd M(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = {g(rng), g(rng)};
      const Eigen::MatrixXcd U = test::random_unitary(n, rng);
      const Spectrum a = eigenvalues(M);
      const Spectrum b = eigenvalues(Eigen::MatrixXcd(U * M * U.adjoint()));
      CHECK(test::hausdorff_one_sided(a.eigenvalues, b.eigenvalues) < 1e-10 * a.norm);
      CHECK(test::hausdorff_one_sided(b.eigenvalues, a.eigenvalues) < 1e-10 * a.norm);
      check_certificates(M, a);
    }
  }

  TEST_CASE("block structure is found and preserved") {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(5, 5);
    M(0, 0) = 1.0;
    M(0, 3) = 2.0;
    M(3, 0) = 0.5;
    M(3, 3) = -1.0;
    M(1, 1) = Complex{0.0, 1.0};
    M(2, 4) = 1.0;
    M(2, 2) = 3.0;
    M(4, 4) = 4.0;
    const Spectrum s = eigenvalues(M);
    // Block {0,3}: eigenvalues of [[1,2],[0.5,-1]] are +-sqrt(2).
    const std::vector<Complex> expect{std::sqrt(2.0), -std::sqrt(2.0), Complex{0.0, 1.0}, 3.0, 4.0};
    CHECK(test::hausdorff_one_sided(expect, s.eigenvalues) < 1e-14);
    check_certificates(M, s);
  }

  TEST_CASE("balancing handles badly scaled matrices") {
    const int n = 8;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXd D(n);
    for (int i = 0; i < n; ++i) D(i) = std::pow(10.0, 2 * i - 7);
    std::mt19937_64 rng(3);
    Eigen::MatrixXcd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = test::random_complex(rng);
    M = D.cast<Complex>().asDiagonal() * B * D.cwiseInverse().cast<Complex>().asDiagonal();
    const Spectrum a = eigenvalues(B);
    const Spectrum b = eigenvalues(M);
    CHECK(test::hausdorff_one_sided(a.eigenvalues, b.eigenvalues) < 1e-9);
    const Eigen::VectorXd scale = balance_scaling(M);
    for (int i = 0; i < n; ++i) {
      const double e = std::log2(scale(i));
      CHECK(std::abs(e - std::round(e)) < 1e-12);
    }
  }

  TEST_CASE("oscillator matrix from quantization") {
    const OperatorMatrix H{0.5 * (weyl_monomial(2, 0, 20, 0.1) + weyl_monomial(0, 2, 20, 0.1)),
                           BasisSpec::saddle(20, 0, 0.1), 0};
    const Spectrum s = eigenvalues(H);
    std::vector<Complex> expect;
    for (int l = 0; l <= 20; ++l) expect.push_back((l + 0.5) * 0.1);
    CHECK(test::hausdorff_one_sided(expect, s.eigenvalues) < 1e-14);
  }
}
