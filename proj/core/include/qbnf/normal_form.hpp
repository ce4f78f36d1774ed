#pragma once

// Quantum Birkhoff normal forms.
//
// Closed orbit: p = f(tau) + mu(tau) x xi + perturbation on the cylinder is conjugated,
// one joint grade at a time, to a function of (tau, x xi, h) plus terms of grade > N.
// Equilibrium: a complex-scaled saddle is conjugated to a function of the two harmonic
// actions iota_i = (x_i^2 + xi_i^2)/2.
//
// Every step applies moyal_conjugate with a generator free of resonant terms, so the
// result is the exact Weyl symbol of a similar operator up to grade N.

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "qbnf/symbol.hpp"
#include "qbnf/tau_series.hpp"

namespace qbnf {

struct CylinderModel {
  TauSeries f{{0.0, 1.0}, 1};
  TauSeries mu{{1.0}, 0};
  /// Grade >= 3 classical terms, t-dependent x xi terms and h-order >= 1 terms.
  FormalSymbol perturbation{PhaseSpec::cylinder(8)};
  bool orientable = true;
  double action = 0.0;  // S
  double energy = 0.0;  // E0
  friend bool operator==(const CylinderModel&, const CylinderModel&) = default;
};

struct SaddleModel {
  double energy = 0.0;  // E0
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// Taylor terms of degree >= 3 and h-order >= 1 terms, in the unscaled coordinates.
  FormalSymbol higher{PhaseSpec::plane(2, 8)};
  friend bool operator==(const SaddleModel&, const SaddleModel&) = default;
};

/// Throws ConfigError naming the first violated model invariant.
void validate(const CylinderModel& model);
void validate(const SaddleModel& model);

/// f(tau) + mu(tau) x xi + perturbation on the given phase space.
FormalSymbol cylinder_symbol(const CylinderModel& model, const PhaseSpec& spec);
/// E0 + (lambda1/2)(xi1^2 - x1^2) + (lambda2/2)(xi2^2 + x2^2) + higher, unscaled.
FormalSymbol saddle_symbol(const SaddleModel& model, const PhaseSpec& spec);

enum class NormalFormKind { ClosedOrbit, Equilibrium };

/// P(u, v; h) = sum c[u_pow, v_pow, j] u^u_pow v^v_pow h^j.
/// ClosedOrbit: u = tau, v = iota with quantum spectrum (l + 1/2) h / i.
/// Equilibrium: u = iota1, v = iota2 with quantum spectra (k + 1/2) h, (l + 1/2) h.
/// Coefficients refer to the functional calculus: the operator is P(hD_t, Op(iota); h).
struct NormalFormPoly {
  using Key = std::array<int, 3>;

  NormalFormKind kind = NormalFormKind::ClosedOrbit;
  std::map<Key, Complex> coeffs;
  int order = 0;  // N
  double action = 0.0;
  double energy = 0.0;
  bool orientable = true;

  /// Joint grade 2 v_pow + 2 j (closed orbit) or 2 u_pow + 2 v_pow + 2 j (equilibrium).
  int grade(const Key& k) const;
  Complex coefficient(int u_pow, int v_pow, int j) const;
  int max_h_power() const;
  Complex evaluate(Complex u, Complex v, double h) const;
  /// p_j(u, v): the coefficient of h^j.
  Complex evaluate_part(int j, Complex u, Complex v) const;
  std::uint64_t fingerprint() const;
};

struct GeneratorStep {
  int grade = 0;
  /// P <- moyal_conjugate(P, generator).
  FormalSymbol generator;
};

struct GeneratorChain {
  std::vector<GeneratorStep> steps;
  /// Symbol the chain is applied to (Birkhoff coordinates in the equilibrium case).
  FormalSymbol input;
  /// Resonant part of grade <= N of the conjugated symbol.
  FormalSymbol weyl_normal_form;
  /// Terms of grade > N of the conjugated symbol.
  FormalSymbol remainder;
  /// Largest surviving non-resonant coefficient of grade <= N, relative.
  double nonresonant_residue = 0.0;
};

struct BnfOptions {
  /// Working truncation is N + grade_slack so that R_{N+1} is recorded.
  int grade_slack = 1;
  /// tau-Taylor truncation; < 0 means the working grade.
  int tau_max = -1;
  SeriesOptions series{};
};

struct BnfResult {
  NormalFormPoly normal_form;
  GeneratorChain chain;
};

struct Averaging {
  FormalSymbol lambda;  // lambda(t, tau), no x, xi dependence
  TauSeries mu_bar;
};

/// Solves mu(t,tau) - f'(tau) d_t lambda = <mu>(tau) mode by mode.
/// mu_t holds the terms c e^{imt} tau^a of mu (degree 0, h-order 0).
Averaging average_mu(const TauSeries& f, const FormalSymbol& mu_t);

BnfResult closed_orbit_bnf(const CylinderModel& model, int N, const BnfOptions& opts = {});

/// Per-axis substitution x = (x' + i xi')/sqrt2, xi = (xi' + i x')/sqrt2, so that
/// (x^2 + xi^2)/2 = i x' xi' and {xi', x'} = 1.  Expects a complex-scaled symbol.
FormalSymbol birkhoff_coordinates(const FormalSymbol& scaled);

BnfResult equilibrium_bnf(const SaddleModel& model, int N, const BnfOptions& opts = {});

/// Applies the chain to its input again.
FormalSymbol replay(const GeneratorChain& chain);

/// Op^w((x xi)^n) = sum_p d[p] h^p Op^w(x xi)^(n-p).
std::vector<double> weyl_power_correction(int n);

struct OrbitDiagnostics {
  double tau = 0.0;
  double period = 0.0;
  double floquet = 0.0;
};

/// tau_E = f^{-1}(E) by Newton, T = 2 pi / f'(tau_E), |lambda| = exp(T mu(tau_E)).
/// Throws ConfigError if E leaves the image of [-tau_window, tau_window].
OrbitDiagnostics orbit_diagnostics(const TauSeries& f, const TauSeries& mu, double E,
                                   double tau_window = 1.0);

}  // namespace qbnf
