#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qbnf/error.hpp"
#include "qbnf/lattice.hpp"

using namespace qbnf;

namespace {

const Complex kI{0.0, 1.0};

NormalFormPoly closed_orbit(double S, bool orientable) {
  NormalFormPoly nf;
  nf.kind = NormalFormKind::ClosedOrbit;
  nf.coeffs[{1, 0, 0}] = 1.0;   // tau
  nf.coeffs[{2, 0, 0}] = 0.5;   // tau^2
  nf.coeffs[{0, 1, 0}] = 1.0;   // iota
  nf.coeffs[{0, 2, 0}] = Complex{0.05, 0.01};
  nf.coeffs[{0, 0, 2}] = 0.02;
  nf.order = 4;
  nf.action = S;
  nf.orientable = orientable;
  return nf;
}

NormalFormPoly saddle(double E0, double l1, double l2) {
  NormalFormPoly nf;
  nf.kind = NormalFormKind::Equilibrium;
  nf.coeffs[{0, 0, 0}] = E0;
  nf.coeffs[{1, 0, 0}] = -kI * l1;
  nf.coeffs[{0, 1, 0}] = l2;
  nf.coeffs[{1, 1, 0}] = 0.2 * kI;
  nf.order = 4;
  nf.energy = E0;
  return nf;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("window") {
    Window w{0.0, 0.5, 0.3};
    CHECK(w.contains({0.1, -0.2}));
    CHECK_FALSE(w.contains({0.6, -0.2}));
    CHECK_FALSE(w.contains({0.1, -0.4}));
    CHECK_FALSE(w.contains({0.1, 0.01}));
    CHECK(w.grown(0.2).contains({0.6, -0.4}));
    CHECK_THROWS_AS((Window{0.0, -1.0, 0.3}).validate(), ConfigError);
  }

  TEST_CASE("saddle lattice is the normal form at half-integer actions") {
    const double h = 0.05;
    const Window w{0.0, 0.5, 0.5};
    const ResonanceLattice lat = saddle_lattice(saddle(0.0, 1.0, std::sqrt(2.0)), h, w);
    REQUIRE_FALSE(lat.entries.empty());
    int count = 0;
    for (int k = 0; k < 40; ++k)
      for (int l = 0; l < 40; ++l) {
        const double u = (k + 0.5) * h, v = (l + 0.5) * h;
        const Complex z = -kI * u + std::sqrt(2.0) * v + 0.2 * kI * u * v;
        if (w.contains(z)) ++count;
      }
    CHECK(lat.entries.size() == static_cast<std::size_t>(count));
    for (const auto& e : lat.entries) {
      const double u = (e.k + 0.5) * h, v = (e.l + 0.5) * h;
      CHECK(std::abs(e.z - (-kI * u + std::sqrt(2.0) * v + 0.2 * kI * u * v)) < 1e-15);
      CHECK(w.contains(e.z));
    }
  }

  TEST_CASE("closed-orbit lattice uses the Floquet offset and the half shift") {
    const double h = 0.05, S = 0.4;
    const Window w{0.0, 0.4, 0.3};
    for (bool orientable : {true, false}) {
      const NormalFormPoly nf = closed_orbit(S, orientable);
      const ResonanceLattice lat = closed_orbit_lattice(nf, h, w);
      REQUIRE_FALSE(lat.entries.empty());
      int count = 0;
      // f(tau) = tau + tau^2/2 also returns to the window near tau = -2; only the branch through
      // the orbit energy belongs to the lattice.
      for (int k = -200; k <= 200; ++k)
        for (int l = 0; l <= 50; ++l) {
          const double tau = (orientable ? h * k : h * (k + 0.5 * l)) - S / (2.0 * std::numbers::pi);
          if (tau < -1.0) continue;
          const Complex iota = (l + 0.5) * h / kI;
          const Complex z = tau + 0.5 * tau * tau + iota + Complex{0.05, 0.01} * iota * iota + 0.02 * h * h;
          if (w.contains(z)) ++count;
          for (const auto& e : lat.entries)
            if (e.k == k && e.l == l) CHECK(std::abs(e.z - z) < 1e-15);
        }
      CHECK(lat.entries.size() == static_cast<std::size_t>(count));
    }
  }

  TEST_CASE("kind mismatch is rejected") {
    CHECK_THROWS_AS(saddle_lattice(closed_orbit(0.0, true), 0.1, Window{}), SpecError);
    CHECK_THROWS_AS(closed_orbit_lattice(saddle(0.0, 1.0, 1.0), 0.1, Window{}), SpecError);
  }

  TEST_CASE("rescaled parts obey the scaling identity") {
    const NormalFormPoly nf = saddle(0.0, 1.0, std::sqrt(2.0));
    CHECK(std::abs(rescaled_part(nf, 0, 0.3, 0.2, 0.5) - nf.evaluate_part(0, 0.15, 0.1)) < 1e-15);
    CHECK(homogeneity_check(nf, 2.0, 0.3, 20) <= 1e-12);
    CHECK(homogeneity_check(closed_orbit(0.0, true), 0.7, 0.2, 20) <= 1e-12);
    CHECK(homogeneity_check(closed_orbit(0.0, true), -1.0, 0.2, 20, 99) <= 1e-12);
  }
}
