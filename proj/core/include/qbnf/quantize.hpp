#pragma once

// Direct Weyl quantization of polynomial symbols into dense matrices.
//
// Cylinder basis: e^{(i/h) tau_{k,l} t} u_l(y) with tau_{k,l} = h k - S/2pi (orientable) or
// h (k + l/2) - S/2pi (non-orientable).  Saddle basis: u_k(x1) u_l(x2).  u_l is the l-th
// Hermite function for semiclassical parameter h.

#include <Eigen/Dense>
#include <cstdint>

#include "qbnf/symbol.hpp"

namespace qbnf {

struct BasisSpec {
  enum class Kind { Cylinder, Saddle };

  static constexpr int kDefaultDimensionCap = 5000;

  Kind kind = Kind::Saddle;
  double h = 0.1;
  // Cylinder.
  int k_min = 0, k_max = 0;
  int levels = 0;  // L_max
  double action = 0.0;
  bool orientable = true;
  // Saddle.
  int levels1 = 0, levels2 = 0;
  int dimension_cap = kDefaultDimensionCap;

  static BasisSpec cylinder(int k_min, int k_max, int levels, double h, double action,
                            bool orientable);
  static BasisSpec saddle(int levels1, int levels2, double h);

  int dimension() const;
  /// Row/column of (k, l); k is the Fourier index (cylinder) or the first level (saddle).
  int index(int k, int l) const;
  /// (k, l) of an index.
  std::array<int, 2> label(int index) const;
  /// Throws ConfigError on empty ranges and DimensionError above the cap.
  void validate() const;
  /// L + extra_levels, k-range widened by extra_k on both sides.
  BasisSpec enlarged(int extra_levels, int extra_k) const;
  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

struct OperatorMatrix {
  Eigen::MatrixXcd matrix;
  BasisSpec basis;
  std::uint64_t symbol_fingerprint = 0;
};

/// x1 -> e^{i pi/4} x1, xi1 -> e^{-i pi/4} xi1.
FormalSymbol complex_scale(const FormalSymbol& symbol);

/// x = (y - i eta)/sqrt2, xi = (y + i eta)/(i sqrt2); x xi becomes (y^2 + eta^2)/(2i).
/// The new pair (y, eta) is stored in the (x, xi) slots.
FormalSymbol metaplectic_substitute(const FormalSymbol& symbol);

/// Weyl quantization of y^p eta^q on levels 0..levels with y = sqrt(h/2)(a* + a),
/// eta = i sqrt(h/2)(a* - a).  Exact: the computation is padded by p + q levels.
Eigen::MatrixXcd weyl_monomial(int p, int q, int levels, double h);

OperatorMatrix assemble_cylinder(const FormalSymbol& symbol, const BasisSpec& basis);
OperatorMatrix assemble_saddle(const FormalSymbol& symbol, const BasisSpec& basis);

}  // namespace qbnf
