#pragma once

// Test-side generators and oracles.  Nothing here calls the code under test except to
// build inputs.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "qbnf/quantize.hpp"
#include "qbnf/symbol.hpp"

namespace qbnf::test {

inline Complex random_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

struct RandomShape {
  int terms = 4;
  int max_degree = 3;  // per pair
  int max_tau = 2;
  int max_mode = 2;
  int max_h = 1;
};

/// Random polynomial symbol on `spec`.  Non-orientable modes respect the Floquet parity.
inline FormalSymbol random_symbol(const PhaseSpec& spec, std::mt19937_64& rng,
                                  const RandomShape& shape = {}) {
  std::uniform_int_distribution<int> deg(0, shape.max_degree);
  std::uniform_int_distribution<int> tau(0, spec.has_angle ? shape.max_tau : 0);
  std::uniform_int_distribution<int> mode(-shape.max_mode, shape.max_mode);
  std::uniform_int_distribution<int> hp(0, shape.max_h);
  FormalSymbol s(spec);
  for (int n = 0; n < shape.terms; ++n) {
    Monomial m;
    for (int i = 0; i < spec.num_pairs; ++i) {
      m.x_pow[i] = deg(rng);
      m.xi_pow[i] = deg(rng);
    }
    m.h_power = hp(rng);
    if (spec.has_angle) {
      m.tau_power = tau(rng);
      m.twice_mode = 2 * mode(rng);
      if (!spec.orientable && (m.degree() % 2 != 0)) m.twice_mode += 1;
    }
    s.add(m, random_complex(rng));
  }
  return s;
}

/// Transport of p0 = f(tau) + mu(tau) x xi on the cylinder, without the mu' x xi d_t part:
///   T u = f'(tau) d_t u + mu(tau) (x d_x - xi d_xi) u.
inline FormalSymbol cylinder_transport(const FormalSymbol& u, const TauSeries& f, const TauSeries& mu) {
  const PhaseSpec& spec = u.spec();
  FormalSymbol dt(spec), euler(spec);
  for (const auto& [m, c] : u.terms()) {
    dt.add(m, c * Complex{0.0, m.mode()});
    euler.add(m, c * static_cast<double>(m.x_pow[0] - m.xi_pow[0]));
  }
  const TauSeries fp = f.derivative().resized(spec.tau_max);
  const FormalSymbol F = FormalSymbol::from_tau_series(spec, fp, Monomial{});
  const FormalSymbol M = FormalSymbol::from_tau_series(spec, mu.resized(spec.tau_max), Monomial{});
  return F * dt + M * euler;
}

inline FormalSymbol plane_transport(const FormalSymbol& u, const std::array<Complex, 2>& nu) {
  FormalSymbol out(u.spec());
  for (const auto& [m, c] : u.terms())
    out.add(m, c * (nu[0] * double(m.x_pow[0] - m.xi_pow[0]) + nu[1] * double(m.x_pow[1] - m.xi_pow[1])));
  return out;
}

/// Largest defect |C - A B| over the columns whose images stay inside the basis,
/// relative to the largest entry of A B there.
inline double interior_defect(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                              const Eigen::MatrixXcd& C, const BasisSpec& basis, int level_reach,
                              int k_reach) {
  const Eigen::MatrixXcd AB = A * B;
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < basis.dimension(); ++j) {
    const auto [k, l] = basis.label(j);
    bool inside;
    if (basis.kind == BasisSpec::Kind::Cylinder)
      inside = l + level_reach <= basis.levels && k - k_reach >= basis.k_min && k + k_reach <= basis.k_max;
    else
      inside = k + level_reach <= basis.levels1 && l + level_reach <= basis.levels2;
    if (!inside) continue;
    for (int i = 0; i < basis.dimension(); ++i) {
      worst = std::max(worst, std::abs(C(i, j) - AB(i, j)));
      scale = std::max(scale, std::abs(AB(i, j)));
    }
  }
  return worst / std::max(scale, 1e-300);
}

/// Per-pair degree and total mode reach of a symbol, for interior_defect.
inline int level_reach(const FormalSymbol& s) {
  int r = 0;
  for (const auto& [m, c] : s.terms()) r = std::max({r, m.x_pow[0] + m.xi_pow[0], m.x_pow[1] + m.xi_pow[1]});
  return r;
}

inline int mode_reach(const FormalSymbol& s) {
  int r = 0;
  for (const auto& [m, c] : s.terms()) r = std::max(r, (std::abs(m.twice_mode) + m.degree() + 1) / 2 + 1);
  return r;
}

/// Uniformly random unitary of size n (QR of a complex Gaussian matrix).
inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd Z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Z(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

/// Largest distance from each of `a` to its nearest element of `b`.
inline double hausdorff_one_sided(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double worst = 0.0;
  for (Complex z : a) {
    double best = INFINITY;
    for (Complex w : b) best = std::min(best, std::abs(z - w));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace qbnf::test
