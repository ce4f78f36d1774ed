#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "qbnf/error.hpp"
#include "qbnf/symbol.hpp"

namespace qbnf {
namespace {

const Complex kI{0.0, 1.0};

enum class Piece { Star, OddBracket, Poisson };

double falling(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
  return r;
}

double inv_factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r /= static_cast<double>(i);
  return r;
}

void require_same(const FormalSymbol& a, const FormalSymbol& b, const char* what) {
  if (!(a.spec() == b.spec()))
    throw SpecError(std::string(what) + ": operands live on different phase spaces");
}

// Expands exp(h/2i Pi) with Pi = sum_i (d_xi (x) d_x - d_x (x) d_xi) + d_tau (x) d_t - d_t (x) d_tau
// slot by slot.  A slot used n_s times contributes sign_s^{n_s} / n_s!; the k-th order
// carries (1/2i)^k h^k.
void bidifferential(const Monomial& ma, Complex ca, const Monomial& mb, Complex cb, Piece piece,
                    FormalSymbol& out) {
  const int pairs = out.spec().num_pairs;
  const bool angle = out.spec().has_angle;
  const int grade_max = out.spec().grade_max;
  const int base_grade = ma.grade() + mb.grade() - (piece == Piece::Star ? 0 : 2);
  if (base_grade > grade_max) return;
  const int tau_room = (grade_max - base_grade) / 2;

  // Per-pair slot limits: n_plus uses d_xi on a, d_x on b; n_minus uses d_x on a, d_xi on b.
  std::array<int, 2> lim_plus{0, 0}, lim_minus{0, 0};
  for (int i = 0; i < pairs; ++i) {
    lim_plus[i] = std::min(ma.xi_pow[i], mb.x_pow[i]);
    lim_minus[i] = std::min(ma.x_pow[i], mb.xi_pow[i]);
  }
  // tau-t slot: d_tau on a, d_t on b (needs m_b != 0); t-tau slot: d_t on a, d_tau on b.
  int lim_tt = 0, lim_ttm = 0;
  if (angle) {
    lim_tt = mb.twice_mode != 0 ? std::min(ma.tau_power, tau_room) : 0;
    lim_ttm = ma.twice_mode != 0 ? std::min(mb.tau_power, tau_room) : 0;
  }
  const Complex im_a = kI * ma.mode();
  const Complex im_b = kI * mb.mode();
  const int max_order = piece == Piece::Poisson ? 1 : 1 << 20;

  for (int p0 = 0; p0 <= lim_plus[0]; ++p0)
    for (int q0 = 0; q0 <= lim_minus[0]; ++q0)
      for (int p1 = 0; p1 <= lim_plus[1]; ++p1)
        for (int q1 = 0; q1 <= lim_minus[1]; ++q1)
          for (int r = 0; r <= lim_tt; ++r)
            for (int s = 0; s + r <= tau_room && s <= lim_ttm; ++s) {
              const int n = p0 + q0 + p1 + q1 + r + s;
              if (n > max_order) break;
              if (piece == Piece::Poisson && n != 1) continue;
              if (piece == Piece::OddBracket && n % 2 == 0) continue;
              double w = inv_factorial(p0) * inv_factorial(q0) * inv_factorial(p1) *
                         inv_factorial(q1) * inv_factorial(r) * inv_factorial(s);
              if ((q0 + q1 + s) % 2) w = -w;
              w *= falling(ma.xi_pow[0], p0) * falling(mb.x_pow[0], p0);
              w *= falling(ma.x_pow[0], q0) * falling(mb.xi_pow[0], q0);
              w *= falling(ma.xi_pow[1], p1) * falling(mb.x_pow[1], p1);
              w *= falling(ma.x_pow[1], q1) * falling(mb.xi_pow[1], q1);
              w *= falling(ma.tau_power, r) * falling(mb.tau_power, s);
              Complex c = ca * cb * w;
              if (r) c *= std::pow(im_b, r);
              if (s) c *= std::pow(im_a, s);
              Monomial m;
              m.twice_mode = ma.twice_mode + mb.twice_mode;
              m.tau_power = ma.tau_power + mb.tau_power - r - s;
              m.x_pow = {ma.x_pow[0] + mb.x_pow[0] - p0 - q0, ma.x_pow[1] + mb.x_pow[1] - p1 - q1};
              m.xi_pow = {ma.xi_pow[0] + mb.xi_pow[0] - p0 - q0,
                          ma.xi_pow[1] + mb.xi_pow[1] - p1 - q1};
              m.h_power = ma.h_power + mb.h_power;
              switch (piece) {
                case Piece::Star:
                  c *= std::pow(1.0 / (2.0 * kI), n);
                  m.h_power += n;
                  break;
                case Piece::OddBracket:
                  c *= -2.0 * kI * std::pow(1.0 / (2.0 * kI), n);
                  m.h_power += n - 1;
                  break;
                case Piece::Poisson:
                  break;
              }
              out.add(m, c);
            }
}

FormalSymbol combine(const FormalSymbol& a, const FormalSymbol& b, Piece piece) {
  FormalSymbol out(a.spec());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) bidifferential(ma, ca, mb, cb, piece, out);
  return out.pruned();
}

void validate_generator(const FormalSymbol& G, const char* what) {
  for (const auto& [m, c] : G.terms()) {
    if (m.is_central()) continue;
    if (m.grade() < 2)
      throw SpecError(std::string(what) + ": generator term of grade < 2: " + to_string(m));
  }
}

int iteration_cap(const FormalSymbol& P, const SeriesOptions& opts) {
  return opts.max_iterations >= 0 ? opts.max_iterations
                                  : std::max(2 * P.spec().grade_max, 64);
}

template <class Step>
FormalSymbol exponential_series(const FormalSymbol& P, const FormalSymbol& G,
                                const SeriesOptions& opts, const char* what, Step step) {
  require_same(P, G, what);
  validate_generator(G, what);
  const FormalSymbol gen = G.filtered([](const Monomial& m) { return !m.is_central(); });
  FormalSymbol result = P;
  if (gen.empty()) return result;
  const int cap = iteration_cap(P, opts);
  FormalSymbol term = P;
  for (int k = 1; k <= cap; ++k) {
    term = step(gen, term);
    term *= 1.0 / static_cast<double>(k);
    if (term.empty()) return result.pruned();
    result += term;
    if (term.max_abs() <= 1e-17 * std::max(1.0, result.max_abs())) return result.pruned();
  }
  throw ConvergenceError(std::string(what) + ": series did not settle within " +
                         std::to_string(cap) + " iterations");
}

// Groups terms by everything but the tau power so whole tau-series can be divided.
using Shape = std::tuple<int, std::array<int, 2>, std::array<int, 2>, int>;

std::map<Shape, TauSeries> by_shape(const FormalSymbol& v) {
  std::map<Shape, TauSeries> out;
  const int order = v.spec().tau_max;
  for (const auto& [m, c] : v.terms()) {
    auto [it, ins] = out.try_emplace(Shape{m.twice_mode, m.x_pow, m.xi_pow, m.h_power},
                                     TauSeries(order));
    it->second[m.tau_power] += c;
  }
  return out;
}

}  // namespace

FormalSymbol poisson_bracket(const FormalSymbol& a, const FormalSymbol& b) {
  require_same(a, b, "poisson_bracket");
  return combine(a, b, Piece::Poisson);
}

FormalSymbol moyal_star(const FormalSymbol& a, const FormalSymbol& b) {
  require_same(a, b, "moyal_star");
  return combine(a, b, Piece::Star);
}

FormalSymbol moyal_bracket(const FormalSymbol& a, const FormalSymbol& b) {
  require_same(a, b, "moyal_bracket");
  return combine(a, b, Piece::OddBracket);
}

ResonantSplit resonant_project(const FormalSymbol& v) {
  ResonantSplit s{FormalSymbol(v.spec()), FormalSymbol(v.spec())};
  for (const auto& [m, c] : v.terms()) (m.is_resonant() ? s.resonant : s.nonresonant).add(m, c);
  return s;
}

HomologicalSolution homological_solve(const FormalSymbol& v, const TauSeries& f,
                                      const TauSeries& mu) {
  const PhaseSpec& spec = v.spec();
  if (!spec.has_angle) throw SpecError("homological_solve: cylinder form needs an angle variable");
  if (spec.tau_max > f.order() || spec.tau_max > mu.order())
    throw SpecError("homological_solve: f and mu must be given to order tau_max");
  const TauSeries fp = f.resized(spec.tau_max + 1).derivative().resized(spec.tau_max);
  const TauSeries mub = mu.resized(spec.tau_max);
  const double scale = std::max(1.0, std::max(std::abs(fp[0]), std::abs(mub[0])));

  HomologicalSolution sol{FormalSymbol(spec), FormalSymbol(spec)};
  for (const auto& [shape, g] : by_shape(v)) {
    const auto& [twice_mode, alpha, beta, j] = shape;
    Monomial base;
    base.twice_mode = twice_mode;
    base.x_pow = alpha;
    base.xi_pow = beta;
    base.h_power = j;
    if (base.is_resonant()) {
      sol.residual += FormalSymbol::from_tau_series(spec, g, base);
      continue;
    }
    const TauSeries d = (kI * (0.5 * twice_mode)) * fp +
                        static_cast<double>(alpha[0] - beta[0]) * mub;
    if (std::abs(d[0]) <= 1e-14 * scale)
      throw DegeneracyError("homological_solve: vanishing denominator for " + to_string(base));
    sol.generator += FormalSymbol::from_tau_series(spec, g * d.reciprocal(), base);
  }
  sol.generator = sol.generator.pruned();
  return sol;
}

HomologicalSolution homological_solve(const FormalSymbol& v, const std::array<Complex, 2>& nu) {
  const PhaseSpec& spec = v.spec();
  if (spec.has_angle) throw SpecError("homological_solve: plane form used on the cylinder");
  const double scale = std::max({1.0, std::abs(nu[0]), std::abs(nu[1])});
  HomologicalSolution sol{FormalSymbol(spec), FormalSymbol(spec)};
  for (const auto& [m, c] : v.terms()) {
    if (m.is_resonant()) {
      sol.residual.add(m, c);
      continue;
    }
    Complex d{0.0};
    for (int i = 0; i < spec.num_pairs; ++i)
      d += nu[static_cast<std::size_t>(i)] * static_cast<double>(m.x_pow[i] - m.xi_pow[i]);
    if (std::abs(d) <= 1e-14 * scale)
      throw DegeneracyError("homological_solve: resonant denominator for " + to_string(m));
    sol.generator.add(m, c / d);
  }
  return sol;
}

FormalSymbol lie_transform(const FormalSymbol& p, const FormalSymbol& G,
                           const SeriesOptions& opts) {
  return exponential_series(p, G, opts, "lie_transform",
                            [](const FormalSymbol& g, const FormalSymbol& t) {
                              return poisson_bracket(g, t);
                            });
}

FormalSymbol moyal_conjugate(const FormalSymbol& P, const FormalSymbol& A,
                             const SeriesOptions& opts) {
  return exponential_series(P, A, opts, "moyal_conjugate",
                            [](const FormalSymbol& a, const FormalSymbol& t) {
                              return moyal_bracket(a, t);
                            });
}

FormalSymbol star_conjugate(const FormalSymbol& P, const FormalSymbol& A,
                            const SeriesOptions& opts) {
  if (!A.empty() && A.h_order() < 1)
    throw SpecError("star_conjugate: generator must carry at least one power of h");
  return moyal_conjugate(P, A, opts);
}

}  // namespace qbnf
