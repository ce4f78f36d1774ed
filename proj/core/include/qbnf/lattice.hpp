#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbnf/normal_form.hpp"

namespace qbnf {

/// Re z in (E0 - eps0, E0 + eps0), Im z in (-eps1, im_tol].
struct Window {
  double center = 0.0;
  double half_width = 0.5;
  double depth = 0.5;
  double im_tol = 1e-10;

  void validate() const;
  bool contains(Complex z) const;
  /// Same window grown by margin on every side.
  Window grown(double margin) const;
  friend bool operator==(const Window&, const Window&) = default;
};

struct LatticeEntry {
  int k = 0;
  int l = 0;
  Complex z;
};

struct ResonanceLattice {
  std::vector<LatticeEntry> entries;
  Window window;
  double h = 0.0;
  /// Normal-form fingerprint as hex, or "direct".
  std::string provenance;
};

struct LatticeOptions {
  /// Margin on the leading-order enumeration bounds.
  double margin = 0.2;
  /// Hard cap on the transverse quantum number l (and on k for the saddle).
  int max_level = 200;
  /// Hard cap on |k - k_center| on the cylinder.
  int max_k_span = 100000;
};

/// z_{k,l} = P(tau, (l + 1/2) h / i; h) with tau = h k - S/2pi, or h (k + l/2) - S/2pi in
/// the non-orientable case.
ResonanceLattice closed_orbit_lattice(const NormalFormPoly& nf, double h, const Window& window,
                                      const LatticeOptions& opts = {});

/// z_{k,l} = P((k + 1/2) h, (l + 1/2) h; h).
ResonanceLattice saddle_lattice(const NormalFormPoly& nf, double h, const Window& window,
                                const LatticeOptions& opts = {});

/// g_j(u, v, eps) = p_j(eps u, eps v) eps^j, the j-th term of the eps-rescaled normal form.
/// For the closed orbit v is sigma, evaluated at iota = sigma / i.
Complex rescaled_part(const NormalFormPoly& nf, int j, double u, double v, double eps);

/// Largest relative defect over `samples` random draws of
///   g_j(u/m, v/m, m eps) = m^j g_j(u, v, eps)                        (scaling)
///   sum_j g_j(a/eps, b/eps, eps) eps^-j h^j = sum_j g_j(a, b, 1) h^j   (rescaled lattice)
/// with m = mu (or drawn in [1/2, 2] when mu <= 0).  Deterministic for a given seed.
double homogeneity_check(const NormalFormPoly& nf, double mu, double eps, int samples,
                         std::uint64_t seed = 12345);

}  // namespace qbnf
