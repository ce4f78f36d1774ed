#pragma once

// Truncated Fourier-Taylor-polynomial Weyl symbols on T*(S^1 x R) (the
// "cylinder": angle t, its dual tau, one transverse pair (x, xi)) and on
// T*R^2 (two pairs, no angle).
//
// A term is c * e^{i m t} tau^a x^alpha xi^beta h^j.  Half-integer Fourier
// modes occur in the non-orientable cylinder, so the mode is stored doubled.
// The joint grade of a term is |alpha| + |beta| + 2 j; every symbol is
// truncated at PhaseSpec::grade_max and at tau-power PhaseSpec::tau_max.

#include <array>
#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "qbnf/tau_series.hpp"

namespace qbnf {

struct PhaseSpec {
  bool has_angle = false;
  int num_pairs = 1;
  bool orientable = true;
  int grade_max = 4;
  int tau_max = 0;

  /// Cylinder T*(S^1 x R); tau_max < 0 means "same as grade_max".
  static PhaseSpec cylinder(int grade_max, bool orientable = true, int tau_max = -1);
  /// T*R^n without angle variable, n = 1 or 2.
  static PhaseSpec plane(int num_pairs, int grade_max);

  PhaseSpec with_grade_max(int g) const;
  void validate() const;
  friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
};

struct Monomial {
  int twice_mode = 0;
  int tau_power = 0;
  std::array<int, 2> x_pow{0, 0};
  std::array<int, 2> xi_pow{0, 0};
  int h_power = 0;

  double mode() const { return 0.5 * twice_mode; }
  int degree() const { return x_pow[0] + x_pow[1] + xi_pow[0] + xi_pow[1]; }
  int grade() const { return degree() + 2 * h_power; }
  /// Depends only on tau, the products x_i xi_i and h.
  bool is_resonant() const {
    return twice_mode == 0 && x_pow[0] == xi_pow[0] && x_pow[1] == xi_pow[1];
  }
  bool is_central() const { return twice_mode == 0 && tau_power == 0 && degree() == 0; }

  friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

std::string to_string(const Monomial& m);

/// Point in (complexified) phase space, used for pointwise evaluation.
struct PhasePoint {
  Complex t{0.0}, tau{0.0};
  std::array<Complex, 2> x{}, xi{};
  Complex h{0.0};
};

class FormalSymbol {
 public:
  using TermMap = std::map<Monomial, Complex>;

  /// Relative threshold below which coefficients are discarded by prune().
  static constexpr double kPruneRelative = 1e-15;

  FormalSymbol() : FormalSymbol(PhaseSpec{}) {}
  explicit FormalSymbol(PhaseSpec spec);

  static FormalSymbol constant(const PhaseSpec& spec, Complex c);
  static FormalSymbol term(const PhaseSpec& spec, const Monomial& m, Complex c = 1.0);
  /// g(tau) e^{i m t} x^alpha xi^beta h^j with g a tau-series.
  static FormalSymbol from_tau_series(const PhaseSpec& spec, const TauSeries& g,
                                      const Monomial& shape);

  const PhaseSpec& spec() const { return spec_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Checks the term against the phase space (throws SpecError) and returns
  /// false when the term lies beyond the truncation and is dropped.
  bool admits(const Monomial& m) const;
  /// Accumulates c into the coefficient of m; terms beyond truncation are dropped.
  void add(const Monomial& m, Complex c);
  Complex coefficient(const Monomial& m) const;

  int min_grade() const;
  int max_grade() const;
  /// Smallest h-power present (0 for the empty symbol).
  int h_order() const;
  double max_abs() const;

  FormalSymbol grade_part(int grade) const;
  FormalSymbol filtered(const std::function<bool(const Monomial&)>& keep) const;
  FormalSymbol truncated(int grade_max) const;
  /// Same terms on a phase space with a different grade truncation.
  FormalSymbol respecced(const PhaseSpec& spec) const;
  FormalSymbol pruned() const;

  Complex evaluate(const PhasePoint& p) const;
  /// coefficient(-m, ...) == conj(coefficient(m, ...)) for every term.
  bool is_real(double tol = 1e-12) const;
  std::uint64_t fingerprint() const;

  FormalSymbol& operator+=(const FormalSymbol& o);
  FormalSymbol& operator-=(const FormalSymbol& o);
  FormalSymbol& operator*=(Complex s);

  friend FormalSymbol operator+(FormalSymbol a, const FormalSymbol& b) { return a += b; }
  friend FormalSymbol operator-(FormalSymbol a, const FormalSymbol& b) { return a -= b; }
  friend FormalSymbol operator*(FormalSymbol a, Complex s) { return a *= s; }
  friend FormalSymbol operator*(Complex s, FormalSymbol a) { return a *= s; }
  /// Pointwise (commutative) product, truncated.
  friend FormalSymbol operator*(const FormalSymbol& a, const FormalSymbol& b);

  /// Largest coefficient difference, relative to max(1, largest coefficient).
  friend double distance(const FormalSymbol& a, const FormalSymbol& b);
  /// Same phase space and identical term maps.
  friend bool operator==(const FormalSymbol&, const FormalSymbol&) = default;

 private:
  PhaseSpec spec_;
  TermMap terms_;
};

std::string to_string(const FormalSymbol& s);

/// Linear substitution on one symplectic pair:
///   x_old = m[0][0] x + m[0][1] xi,   xi_old = m[1][0] x + m[1][1] xi.
/// Degrees are preserved, so truncation is unaffected.
FormalSymbol linear_substitute(const FormalSymbol& s, int pair,
                               const std::array<std::array<Complex, 2>, 2>& m);

// ---------------------------------------------------------------------------
// Bracket and star product.

/// {a,b} = sum_i (d_xi a d_x b - d_x a d_xi b) + d_tau a d_t b - d_t a d_tau b.
FormalSymbol poisson_bracket(const FormalSymbol& a, const FormalSymbol& b);

/// Weyl composition a # b = sum_k (1/k!) (h/2i)^k B_k(a,b).
FormalSymbol moyal_star(const FormalSymbol& a, const FormalSymbol& b);

/// -(i/h) (a # b - b # a), computed exactly.  Leading term is {b, a}.
FormalSymbol moyal_bracket(const FormalSymbol& a, const FormalSymbol& b);

struct ResonantSplit {
  FormalSymbol resonant;
  FormalSymbol nonresonant;
};

/// Cylinder: keeps m = 0, alpha = beta.  Plane: keeps alpha = beta.
ResonantSplit resonant_project(const FormalSymbol& v);

struct HomologicalSolution {
  FormalSymbol generator;
  FormalSymbol residual;
};

/// Solves (f'(tau) d_t + mu(tau)(x d_x - xi d_xi)) u = v - [v] term by term.
HomologicalSolution homological_solve(const FormalSymbol& v, const TauSeries& f,
                                      const TauSeries& mu);

/// Plane version with the diagonal transport sum_i nu_i (x_i d_x_i - xi_i d_xi_i),
/// the transport of p0 = sum_i nu_i x_i xi_i.
HomologicalSolution homological_solve(const FormalSymbol& v, const std::array<Complex, 2>& nu);

struct SeriesOptions {
  /// Iteration cap used when the generator has grade-two terms.
  int max_iterations = -1;  // < 0: max(2 grade_max, 64)
};

/// Classical Lie series p o exp(H_G) = sum_k (1/k!) H_G^k p, H_G p = {G, p}.
FormalSymbol lie_transform(const FormalSymbol& p, const FormalSymbol& G,
                           const SeriesOptions& opts = {});

/// Weyl symbol of e^{-iA/h} P e^{iA/h} = sum_k (1/k!) (-(i/h) ad_A)^k P for any
/// generator whose non-central terms have grade >= 2.
FormalSymbol moyal_conjugate(const FormalSymbol& P, const FormalSymbol& A,
                             const SeriesOptions& opts = {});

/// moyal_conjugate restricted to generators of h-order >= 1 (so the h^0 part of
/// P is untouched).  With A = h a, the h^1 coefficient of P changes by {p, a}.
FormalSymbol star_conjugate(const FormalSymbol& P, const FormalSymbol& A,
                            const SeriesOptions& opts = {});

}  // namespace qbnf
