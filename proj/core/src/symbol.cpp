#include "qbnf/symbol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

#include "qbnf/error.hpp"

namespace qbnf {

PhaseSpec PhaseSpec::cylinder(int grade_max, bool orientable, int tau_max) {
  PhaseSpec s;
  s.has_angle = true;
  s.num_pairs = 1;
  s.orientable = orientable;
  s.grade_max = grade_max;
  s.tau_max = tau_max < 0 ? grade_max : tau_max;
  s.validate();
  return s;
}

PhaseSpec PhaseSpec::plane(int num_pairs, int grade_max) {
  PhaseSpec s;
  s.has_angle = false;
  s.num_pairs = num_pairs;
  s.orientable = true;
  s.grade_max = grade_max;
  s.tau_max = 0;
  s.validate();
  return s;
}

PhaseSpec PhaseSpec::with_grade_max(int g) const {
  PhaseSpec s = *this;
  s.grade_max = g;
  s.validate();
  return s;
}

void PhaseSpec::validate() const {
  if (num_pairs != 1 && num_pairs != 2) throw SpecError("PhaseSpec: num_pairs must be 1 or 2");
  if (has_angle && num_pairs != 1) throw SpecError("PhaseSpec: the cylinder has one transverse pair");
  if (grade_max < 0) throw SpecError("PhaseSpec: grade_max must be nonnegative");
  if (tau_max < 0) throw SpecError("PhaseSpec: tau_max must be nonnegative");
  if (!has_angle && tau_max != 0) throw SpecError("PhaseSpec: tau_max requires an angle variable");
}

std::string to_string(const Monomial& m) {
  std::ostringstream os;
  os << "[m=" << m.mode() << " a=" << m.tau_power << " x=(" << m.x_pow[0] << ',' << m.x_pow[1]
     << ") xi=(" << m.xi_pow[0] << ',' << m.xi_pow[1] << ") j=" << m.h_power << ']';
  return os.str();
}

FormalSymbol::FormalSymbol(PhaseSpec spec) : spec_(spec) { spec_.validate(); }

FormalSymbol FormalSymbol::constant(const PhaseSpec& spec, Complex c) {
  FormalSymbol s(spec);
  s.add(Monomial{}, c);
  return s;
}

FormalSymbol FormalSymbol::term(const PhaseSpec& spec, const Monomial& m, Complex c) {
  FormalSymbol s(spec);
  s.add(m, c);
  return s;
}

FormalSymbol FormalSymbol::from_tau_series(const PhaseSpec& spec, const TauSeries& g,
                                           const Monomial& shape) {
  FormalSymbol s(spec);
  for (int a = 0; a <= g.order(); ++a) {
    Monomial m = shape;
    m.tau_power = shape.tau_power + a;
    if (g[a] != Complex{0.0}) s.add(m, g[a]);
  }
  return s;
}

bool FormalSymbol::admits(const Monomial& m) const {
  if (m.tau_power < 0 || m.h_power < 0 || m.x_pow[0] < 0 || m.x_pow[1] < 0 || m.xi_pow[0] < 0 ||
      m.xi_pow[1] < 0)
    throw SpecError("negative exponent in " + to_string(m));
  if (spec_.num_pairs == 1 && (m.x_pow[1] != 0 || m.xi_pow[1] != 0))
    throw SpecError("second pair used on a one-pair phase space: " + to_string(m));
  if (!spec_.has_angle) {
    if (m.twice_mode != 0 || m.tau_power != 0)
      throw SpecError("angle variables used on a phase space without angle: " + to_string(m));
  } else if (spec_.orientable) {
    if (m.twice_mode % 2 != 0)
      throw SpecError("half-integer Fourier mode in the orientable case: " + to_string(m));
  } else {
    // x, xi are anti-periodic in t: 2m = |alpha| - |beta| mod 2.
    const int parity = (m.x_pow[0] - m.xi_pow[0]) & 1;
    if (((m.twice_mode % 2) + 2) % 2 != parity)
      throw SpecError("non-orientable parity 2m = |alpha|-|beta| (mod 2) violated: " +
                      to_string(m));
  }
  return m.grade() <= spec_.grade_max && m.tau_power <= spec_.tau_max;
}

void FormalSymbol::add(const Monomial& m, Complex c) {
  if (!admits(m)) return;
  if (c == Complex{0.0}) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex{0.0}) terms_.erase(it);
  }
}

Complex FormalSymbol::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Complex{0.0} : it->second;
}

int FormalSymbol::min_grade() const {
  int g = std::numeric_limits<int>::max();
  for (const auto& [m, c] : terms_) g = std::min(g, m.grade());
  return terms_.empty() ? 0 : g;
}

int FormalSymbol::max_grade() const {
  int g = 0;
  for (const auto& [m, c] : terms_) g = std::max(g, m.grade());
  return g;
}

int FormalSymbol::h_order() const {
  int j = std::numeric_limits<int>::max();
  for (const auto& [m, c] : terms_) j = std::min(j, m.h_power);
  return terms_.empty() ? 0 : j;
}

double FormalSymbol::max_abs() const {
  double r = 0.0;
  for (const auto& [m, c] : terms_) r = std::max(r, std::abs(c));
  return r;
}

FormalSymbol FormalSymbol::filtered(const std::function<bool(const Monomial&)>& keep) const {
  FormalSymbol s(spec_);
  for (const auto& [m, c] : terms_)
    if (keep(m)) s.terms_.emplace(m, c);
  return s;
}

FormalSymbol FormalSymbol::grade_part(int grade) const {
  return filtered([grade](const Monomial& m) { return m.grade() == grade; });
}

FormalSymbol FormalSymbol::truncated(int grade_max) const {
  return filtered([grade_max](const Monomial& m) { return m.grade() <= grade_max; });
}

FormalSymbol FormalSymbol::respecced(const PhaseSpec& spec) const {
  FormalSymbol s(spec);
  for (const auto& [m, c] : terms_) s.add(m, c);
  return s;
}

FormalSymbol FormalSymbol::pruned() const {
  const double cut = kPruneRelative * max_abs();
  return filtered([&](const Monomial& m) { return std::abs(terms_.at(m)) > cut; });
}

Complex FormalSymbol::evaluate(const PhasePoint& p) const {
  const Complex I{0.0, 1.0};
  Complex acc{0.0};
  for (const auto& [m, c] : terms_) {
    Complex v = c;
    if (m.twice_mode != 0) v *= std::exp(I * m.mode() * p.t);
    v *= std::pow(p.tau, m.tau_power);
    for (int i = 0; i < 2; ++i) {
      if (m.x_pow[i]) v *= std::pow(p.x[i], m.x_pow[i]);
      if (m.xi_pow[i]) v *= std::pow(p.xi[i], m.xi_pow[i]);
    }
    if (m.h_power) v *= std::pow(p.h, m.h_power);
    acc += v;
  }
  return acc;
}

bool FormalSymbol::is_real(double tol) const {
  const double scale = std::max(1.0, max_abs());
  for (const auto& [m, c] : terms_) {
    Monomial mirror = m;
    mirror.twice_mode = -m.twice_mode;
    if (std::abs(coefficient(mirror) - std::conj(c)) > tol * scale) return false;
  }
  return true;
}

std::uint64_t FormalSymbol::fingerprint() const {
  // FNV-1a over the canonical (ordered) term list.
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(spec_.has_angle) | (static_cast<std::uint64_t>(spec_.num_pairs) << 1) |
      (static_cast<std::uint64_t>(spec_.orientable) << 3));
  mix(static_cast<std::uint64_t>(spec_.grade_max));
  mix(static_cast<std::uint64_t>(spec_.tau_max));
  for (const auto& [m, c] : terms_) {
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(m.twice_mode)));
    mix(static_cast<std::uint64_t>(m.tau_power));
    mix(static_cast<std::uint64_t>(m.x_pow[0]) | (static_cast<std::uint64_t>(m.x_pow[1]) << 16) |
        (static_cast<std::uint64_t>(m.xi_pow[0]) << 32) |
        (static_cast<std::uint64_t>(m.xi_pow[1]) << 48));
    mix(static_cast<std::uint64_t>(m.h_power));
    mix(std::bit_cast<std::uint64_t>(c.real()));
    mix(std::bit_cast<std::uint64_t>(c.imag()));
  }
  return hash;
}

namespace {
void require_same_spec(const FormalSymbol& a, const FormalSymbol& b, const char* what) {
  if (!(a.spec() == b.spec()))
    throw SpecError(std::string(what) + ": operands live on different phase spaces");
}
}  // namespace

FormalSymbol& FormalSymbol::operator+=(const FormalSymbol& o) {
  require_same_spec(*this, o, "operator+");
  for (const auto& [m, c] : o.terms_) add(m, c);
  return *this;
}

FormalSymbol& FormalSymbol::operator-=(const FormalSymbol& o) {
  require_same_spec(*this, o, "operator-");
  for (const auto& [m, c] : o.terms_) add(m, -c);
  return *this;
}

FormalSymbol& FormalSymbol::operator*=(Complex s) {
  if (s == Complex{0.0}) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

FormalSymbol operator*(const FormalSymbol& a, const FormalSymbol& b) {
  require_same_spec(a, b, "operator*");
  FormalSymbol r(a.spec());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      Monomial m;
      m.twice_mode = ma.twice_mode + mb.twice_mode;
      m.tau_power = ma.tau_power + mb.tau_power;
      for (int i = 0; i < 2; ++i) {
        m.x_pow[i] = ma.x_pow[i] + mb.x_pow[i];
        m.xi_pow[i] = ma.xi_pow[i] + mb.xi_pow[i];
      }
      m.h_power = ma.h_power + mb.h_power;
      r.add(m, ca * cb);
    }
  return r;
}

double distance(const FormalSymbol& a, const FormalSymbol& b) {
  require_same_spec(a, b, "distance");
  const FormalSymbol d = a - b;
  return d.max_abs() / std::max({1.0, a.max_abs(), b.max_abs()});
}

std::string to_string(const FormalSymbol& s) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : s.terms()) {
    if (!first) os << " + ";
    first = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", c.real(), c.imag());
    os << buf << to_string(m);
  }
  if (first) os << "0";
  return os.str();
}

FormalSymbol linear_substitute(const FormalSymbol& s, int pair,
                               const std::array<std::array<Complex, 2>, 2>& m) {
  if (pair < 0 || pair >= s.spec().num_pairs) throw SpecError("linear_substitute: bad pair index");
  // Expansion of (m00 x + m01 xi)^n as coefficients of x^k xi^(n-k).
  auto expand = [](Complex cx, Complex cxi, int n) {
    std::vector<Complex> out(static_cast<std::size_t>(n) + 1, Complex{0.0});
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      out[static_cast<std::size_t>(k)] = binom * std::pow(cx, k) * std::pow(cxi, n - k);
      binom = binom * (n - k) / (k + 1);
    }
    return out;
  };
  FormalSymbol r(s.spec());
  for (const auto& [mono, c] : s.terms()) {
    const int alpha = mono.x_pow[static_cast<std::size_t>(pair)];
    const int beta = mono.xi_pow[static_cast<std::size_t>(pair)];
    const auto ex = expand(m[0][0], m[0][1], alpha);
    const auto eb = expand(m[1][0], m[1][1], beta);
    for (int i = 0; i <= alpha; ++i)
      for (int k = 0; k <= beta; ++k) {
        const Complex w = ex[static_cast<std::size_t>(i)] * eb[static_cast<std::size_t>(k)];
        if (w == Complex{0.0}) continue;
        Monomial out = mono;
        out.x_pow[static_cast<std::size_t>(pair)] = i + k;
        out.xi_pow[static_cast<std::size_t>(pair)] = (alpha - i) + (beta - k);
        r.add(out, c * w);
      }
  }
  return r.pruned();
}

}  // namespace qbnf
