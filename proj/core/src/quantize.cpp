#include "qbnf/quantize.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "qbnf/error.hpp"

namespace qbnf {
namespace {

const Complex kI{0.0, 1.0};

// Ladder matrices on levels 0..n-1.
Eigen::MatrixXcd position(int n, double h) {
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  const double s = std::sqrt(h / 2.0);
  for (int l = 0; l + 1 < n; ++l) {
    const double v = s * std::sqrt(static_cast<double>(l + 1));
    y(l + 1, l) = v;
    y(l, l + 1) = v;
  }
  return y;
}

Eigen::MatrixXcd momentum(int n, double h) {
  // eta = i sqrt(h/2)(a* - a): (a*)_{l+1,l} = sqrt(l+1), a_{l,l+1} = sqrt(l+1).
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
  const double s = std::sqrt(h / 2.0);
  for (int l = 0; l + 1 < n; ++l) {
    const double v = s * std::sqrt(static_cast<double>(l + 1));
    e(l + 1, l) = kI * v;
    e(l, l + 1) = -kI * v;
  }
  return e;
}

struct MonomialCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int, double>, Eigen::MatrixXcd> entries;
};

MonomialCache& cache() {
  static MonomialCache c;
  return c;
}

double midpoint_offset(const BasisSpec& b) { return -b.action / (2.0 * std::numbers::pi); }

// Entries whose contributions cancel to rounding level are exact zeros of the operator
// (e.g. (y - i eta)^3 only raises the level); clearing them keeps the block structure.
constexpr double kCancellation = 64.0 * std::numeric_limits<double>::epsilon();

void clear_cancellations(Eigen::MatrixXcd& m, const Eigen::MatrixXd& magnitude) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) <= kCancellation * magnitude(i, j)) m(i, j) = 0.0;
}

}  // namespace

BasisSpec BasisSpec::cylinder(int k_min, int k_max, int levels, double h, double action,
                              bool orientable) {
  BasisSpec b;
  b.kind = Kind::Cylinder;
  b.k_min = k_min;
  b.k_max = k_max;
  b.levels = levels;
  b.h = h;
  b.action = action;
  b.orientable = orientable;
  b.validate();
  return b;
}

BasisSpec BasisSpec::saddle(int levels1, int levels2, double h) {
  BasisSpec b;
  b.kind = Kind::Saddle;
  b.levels1 = levels1;
  b.levels2 = levels2;
  b.h = h;
  b.validate();
  return b;
}

int BasisSpec::dimension() const {
  return kind == Kind::Cylinder ? (k_max - k_min + 1) * (levels + 1)
                                : (levels1 + 1) * (levels2 + 1);
}

int BasisSpec::index(int k, int l) const {
  return kind == Kind::Cylinder ? (k - k_min) * (levels + 1) + l : k * (levels2 + 1) + l;
}

std::array<int, 2> BasisSpec::label(int i) const {
  if (kind == Kind::Cylinder) return {k_min + i / (levels + 1), i % (levels + 1)};
  return {i / (levels2 + 1), i % (levels2 + 1)};
}

void BasisSpec::validate() const {
  if (!(h > 0.0)) throw ConfigError("basis: h must be positive");
  if (kind == Kind::Cylinder) {
    if (k_max < k_min) throw ConfigError("basis: empty k-range");
    if (levels < 0) throw ConfigError("basis: negative level cap");
  } else if (levels1 < 0 || levels2 < 0) {
    throw ConfigError("basis: negative level cap");
  }
  const long dim = kind == Kind::Cylinder
                       ? static_cast<long>(k_max - k_min + 1) * (levels + 1)
                       : static_cast<long>(levels1 + 1) * (levels2 + 1);
  if (dim > dimension_cap)
    throw DimensionError("basis: dimension " + std::to_string(dim) + " exceeds the cap " +
                         std::to_string(dimension_cap));
}

BasisSpec BasisSpec::enlarged(int extra_levels, int extra_k) const {
  BasisSpec b = *this;
  if (kind == Kind::Cylinder) {
    b.levels += extra_levels;
    b.k_min -= extra_k;
    b.k_max += extra_k;
  } else {
    b.levels1 += extra_levels;
    b.levels2 += extra_levels;
  }
  b.validate();
  return b;
}

FormalSymbol complex_scale(const FormalSymbol& symbol) {
  const PhaseSpec& spec = symbol.spec();
  if (spec.has_angle || spec.num_pairs != 2)
    throw SpecError("complex_scale: expects a symbol on two pairs without angle");
  FormalSymbol out(spec);
  for (const auto& [m, c] : symbol.terms()) {
    const int n = ((m.x_pow[0] - m.xi_pow[0]) % 8 + 8) % 8;
    // e^{i pi n / 4} with exact values at multiples of pi/2.
    Complex phase;
    switch (n) {
      case 0: phase = 1.0; break;
      case 2: phase = kI; break;
      case 4: phase = -1.0; break;
      case 6: phase = -kI; break;
      default: phase = std::polar(1.0, std::numbers::pi * n / 4.0);
    }
    out.add(m, c * phase);
  }
  return out;
}

FormalSymbol metaplectic_substitute(const FormalSymbol& symbol) {
  if (!symbol.spec().has_angle) throw SpecError("metaplectic_substitute: expects a cylinder symbol");
  const double r = 1.0 / std::numbers::sqrt2;
  const std::array<std::array<Complex, 2>, 2> m{{{Complex{r}, -kI * r}, {-kI * r, Complex{r}}}};
  return linear_substitute(symbol, 0, m);
}

Eigen::MatrixXcd weyl_monomial(int p, int q, int levels, double h) {
  if (p < 0 || q < 0 || levels < 0) throw SpecError("weyl_monomial: negative argument");
  const auto key = std::make_tuple(p, q, levels, h);
  {
    std::lock_guard<std::mutex> lock(cache().mutex);
    auto it = cache().entries.find(key);
    if (it != cache().entries.end()) return it->second;
  }
  const int n = levels + 1 + p + q;
  const Eigen::MatrixXcd y = position(n, h);
  const Eigen::MatrixXcd eta = momentum(n, h);
  // Weyl(eta^q) = eta^q; Weyl(y s) = (y Weyl(s) + Weyl(s) y) / 2.
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(n, n);
  for (int i = 0; i < q; ++i) w = eta * w;
  for (int i = 0; i < p; ++i) w = 0.5 * (y * w + w * y);
  Eigen::MatrixXcd out = w.topLeftCorner(levels + 1, levels + 1);
  std::lock_guard<std::mutex> lock(cache().mutex);
  cache().entries.emplace(key, out);
  return out;
}

OperatorMatrix assemble_cylinder(const FormalSymbol& symbol, const BasisSpec& basis) {
  if (basis.kind != BasisSpec::Kind::Cylinder) throw SpecError("assemble_cylinder: needs a cylinder basis");
  const PhaseSpec& spec = symbol.spec();
  if (!spec.has_angle) throw SpecError("assemble_cylinder: expects a cylinder symbol");
  if (spec.orientable != basis.orientable)
    throw SpecError("assemble_cylinder: symbol and basis disagree on orientability");
  basis.validate();
  const int dim = basis.dimension();
  const int L = basis.levels;
  const double h = basis.h;
  const double offset = midpoint_offset(basis);
  OperatorMatrix out{Eigen::MatrixXcd::Zero(dim, dim), basis, symbol.fingerprint()};
  Eigen::MatrixXd magnitude = Eigen::MatrixXd::Zero(dim, dim);

  // Group by transverse monomial and mode: the (t, tau) factor is a polynomial g(tau).
  struct Factor {
    std::map<int, Complex> tau_coeffs;  // tau^a -> coefficient (h-powers folded in)
  };
  std::map<std::tuple<int, int, int>, Factor> groups;  // (2m, p, q)
  for (const auto& [m, c] : symbol.terms()) {
    if (!basis.orientable && ((m.twice_mode - (m.x_pow[0] + m.xi_pow[0])) % 2 != 0))
      throw SpecError("assemble_cylinder: term violates the Floquet parity: " + to_string(m));
    groups[{m.twice_mode, m.x_pow[0], m.xi_pow[0]}].tau_coeffs[m.tau_power] +=
        c * std::pow(h, m.h_power);
  }
  for (const auto& [key, factor] : groups) {
    const auto& [twice_mode, p, q] = key;
    const Eigen::MatrixXcd W = weyl_monomial(p, q, L, h);
    auto g = [&](double tau) {
      Complex acc{0.0};
      for (const auto& [a, c] : factor.tau_coeffs) acc += c * std::pow(tau, a);
      return acc;
    };
    for (int k = basis.k_min; k <= basis.k_max; ++k)
      for (int l = 0; l <= L; ++l) {
        const double tau_in = basis.orientable ? h * k + offset : h * (k + 0.5 * l) + offset;
        const Complex gm = g(tau_in + 0.5 * h * 0.5 * twice_mode);
        if (gm == Complex{0.0}) continue;
        const int col = basis.index(k, l);
        for (int lp = 0; lp <= L; ++lp) {
          const Complex w = W(lp, l);
          if (w == Complex{0.0}) continue;
          int kp;
          if (basis.orientable) {
            kp = k + twice_mode / 2;
          } else {
            const int twice_kp = 2 * k + twice_mode + (l - lp);
            if (twice_kp % 2 != 0) continue;  // zero by parity of W
            kp = twice_kp / 2;
          }
          if (kp < basis.k_min || kp > basis.k_max) continue;
          out.matrix(basis.index(kp, lp), col) += gm * w;
          magnitude(basis.index(kp, lp), col) += std::abs(gm * w);
        }
      }
  }
  clear_cancellations(out.matrix, magnitude);
  return out;
}

OperatorMatrix assemble_saddle(const FormalSymbol& symbol, const BasisSpec& basis) {
  if (basis.kind != BasisSpec::Kind::Saddle) throw SpecError("assemble_saddle: needs a saddle basis");
  const PhaseSpec& spec = symbol.spec();
  if (spec.has_angle || spec.num_pairs != 2)
    throw SpecError("assemble_saddle: expects a symbol on two pairs");
  basis.validate();
  const int dim = basis.dimension();
  const double h = basis.h;
  OperatorMatrix out{Eigen::MatrixXcd::Zero(dim, dim), basis, symbol.fingerprint()};
  Eigen::MatrixXd magnitude = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& [m, c] : symbol.terms()) {
    const Complex coef = c * std::pow(h, m.h_power);
    const Eigen::MatrixXcd W1 = weyl_monomial(m.x_pow[0], m.xi_pow[0], basis.levels1, h);
    const Eigen::MatrixXcd W2 = weyl_monomial(m.x_pow[1], m.xi_pow[1], basis.levels2, h);
    for (int k = 0; k <= basis.levels1; ++k)
      for (int kp = 0; kp <= basis.levels1; ++kp) {
        const Complex a = W1(kp, k);
        if (a == Complex{0.0}) continue;
        for (int l = 0; l <= basis.levels2; ++l)
          for (int lp = 0; lp <= basis.levels2; ++lp) {
            const Complex b = W2(lp, l);
            if (b == Complex{0.0}) continue;
            out.matrix(basis.index(kp, lp), basis.index(k, l)) += coef * a * b;
            magnitude(basis.index(kp, lp), basis.index(k, l)) += std::abs(coef * a * b);
          }
      }
  }
  clear_cancellations(out.matrix, magnitude);
  return out;
}

}  // namespace qbnf
