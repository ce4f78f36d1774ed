#include "qbnf/normal_form.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "qbnf/error.hpp"
#include "qbnf/quantize.hpp"

namespace qbnf {
namespace {

const Complex kI{0.0, 1.0};

Monomial mono(int twice_mode, int tau, int x0, int xi0, int j = 0, int x1 = 0, int xi1 = 0) {
  Monomial m;
  m.twice_mode = twice_mode;
  m.tau_power = tau;
  m.x_pow = {x0, x1};
  m.xi_pow = {xi0, xi1};
  m.h_power = j;
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double relative_scale(const FormalSymbol& s) { return std::max(1.0, s.max_abs()); }

// Conjugates P degree by degree, d = first..N.  transport_solve maps the grade-d part to
// (u, [v]); the generator applied is A = -u so that d-part of P + {P, A} is resonant.
template <class Solve>
GeneratorChain run_loop(FormalSymbol P, int first, int N, const SeriesOptions& series,
                        Solve solve) {
  GeneratorChain chain;
  chain.input = P;
  for (int d = first; d <= N; ++d) {
    const FormalSymbol v = P.grade_part(d);
    if (v.empty()) continue;
    HomologicalSolution sol = solve(P, v);
    if (sol.generator.empty()) continue;
    FormalSymbol A = sol.generator * Complex{-1.0};
    P = moyal_conjugate(P, A, series);
    chain.steps.push_back({d, std::move(A)});
  }
  const double scale = relative_scale(P);
  chain.weyl_normal_form = FormalSymbol(P.spec());
  chain.remainder = FormalSymbol(P.spec());
  for (const auto& [m, c] : P.terms()) {
    if (m.grade() > N) {
      chain.remainder.add(m, c);
    } else if (m.is_resonant()) {
      chain.weyl_normal_form.add(m, c);
    } else {
      chain.nonresonant_residue = std::max(chain.nonresonant_residue, std::abs(c) / scale);
    }
  }
  if (chain.nonresonant_residue > 1e-9)
    throw ConvergenceError("normal form: non-resonant terms survived elimination (relative " +
                           fmt(chain.nonresonant_residue) + ")");
  return chain;
}

int working_tau(const BnfOptions& opts, int grade_max) {
  return opts.tau_max >= 0 ? opts.tau_max : grade_max;
}

}  // namespace

// ---------------------------------------------------------------------------
// Models.

void validate(const CylinderModel& model) {
  if (model.f.order() < 1) throw ConfigError("cylinder model: f needs at least a linear term");
  if (!model.f.is_real(1e-14)) throw ConfigError("cylinder model: f must be real");
  if (!model.mu.is_real(1e-14)) throw ConfigError("cylinder model: mu must be real");
  if (!(model.f[1].real() > 0.0)) throw ConfigError("cylinder model: f'(0) must be positive");
  if (!(model.mu[0].real() > 0.0)) throw ConfigError("cylinder model: mu(0) must be positive");
  const PhaseSpec& ps = model.perturbation.spec();
  if (!ps.has_angle) throw ConfigError("cylinder model: perturbation must live on the cylinder");
  if (ps.orientable != model.orientable)
    throw ConfigError("cylinder model: perturbation orientability differs from the model");
  for (const auto& [m, c] : model.perturbation.terms()) {
    if (m.grade() < 2 && !(m.degree() == 0 && m.h_power == 0 && m.twice_mode == 0))
      throw ConfigError("cylinder model: term of grade < 2 is not allowed: " + to_string(m));
    if (m.degree() == 0 && m.h_power == 0 && m.twice_mode != 0)
      throw ConfigError("cylinder model: t-dependent term of grade 0: " + to_string(m));
    if (m.h_power == 0 && m.degree() == 2 && m.x_pow[0] != m.xi_pow[0])
      throw ConfigError("cylinder model: quadratic part must be f + mu x xi, found " +
                        to_string(m));
  }
}

void validate(const SaddleModel& model) {
  if (!(model.lambda1 > 0.0) || !(model.lambda2 > 0.0))
    throw ConfigError("saddle model: lambda1 and lambda2 must be positive");
  const PhaseSpec& ps = model.higher.spec();
  if (ps.has_angle || ps.num_pairs != 2)
    throw ConfigError("saddle model: higher terms must live on two pairs without angle");
  for (const auto& [m, c] : model.higher.terms()) {
    if (m.h_power == 0 && m.degree() < 3)
      throw ConfigError("saddle model: classical terms must have degree >= 3, found " +
                        to_string(m));
    if (m.h_power >= 1 && m.grade() < 2)
      throw ConfigError("saddle model: term of grade < 2: " + to_string(m));
  }
}

FormalSymbol cylinder_symbol(const CylinderModel& model, const PhaseSpec& spec) {
  FormalSymbol p = FormalSymbol::from_tau_series(spec, model.f, Monomial{});
  p += FormalSymbol::from_tau_series(spec, model.mu, mono(0, 0, 1, 1));
  p += model.perturbation.respecced(spec);
  return p;
}

FormalSymbol saddle_symbol(const SaddleModel& model, const PhaseSpec& spec) {
  FormalSymbol p = FormalSymbol::constant(spec, model.energy);
  p.add(mono(0, 0, 0, 2), 0.5 * model.lambda1);
  p.add(mono(0, 0, 2, 0), -0.5 * model.lambda1);
  p.add(mono(0, 0, 0, 0, 0, 0, 2), 0.5 * model.lambda2);
  p.add(mono(0, 0, 0, 0, 0, 2, 0), 0.5 * model.lambda2);
  p += model.higher.respecced(spec);
  return p;
}

// ---------------------------------------------------------------------------
// NormalFormPoly.

int NormalFormPoly::grade(const Key& k) const {
  return kind == NormalFormKind::ClosedOrbit ? 2 * k[1] + 2 * k[2]
                                             : 2 * k[0] + 2 * k[1] + 2 * k[2];
}

Complex NormalFormPoly::coefficient(int u_pow, int v_pow, int j) const {
  auto it = coeffs.find(Key{u_pow, v_pow, j});
  return it == coeffs.end() ? Complex{0.0} : it->second;
}

int NormalFormPoly::max_h_power() const {
  int j = 0;
  for (const auto& [k, c] : coeffs) j = std::max(j, k[2]);
  return j;
}

Complex NormalFormPoly::evaluate(Complex u, Complex v, double h) const {
  Complex acc{0.0};
  for (const auto& [k, c] : coeffs) acc += c * std::pow(u, k[0]) * std::pow(v, k[1]) * std::pow(h, k[2]);
  return acc;
}

Complex NormalFormPoly::evaluate_part(int j, Complex u, Complex v) const {
  Complex acc{0.0};
  for (const auto& [k, c] : coeffs)
    if (k[2] == j) acc += c * std::pow(u, k[0]) * std::pow(v, k[1]);
  return acc;
}

std::uint64_t NormalFormPoly::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(kind == NormalFormKind::ClosedOrbit));
  mix(static_cast<std::uint64_t>(order));
  mix(std::bit_cast<std::uint64_t>(action));
  mix(std::bit_cast<std::uint64_t>(energy));
  mix(static_cast<std::uint64_t>(orientable));
  for (const auto& [k, c] : coeffs) {
    mix(static_cast<std::uint64_t>(k[0]) | (static_cast<std::uint64_t>(k[1]) << 20) |
        (static_cast<std::uint64_t>(k[2]) << 40));
    mix(std::bit_cast<std::uint64_t>(c.real()));
    mix(std::bit_cast<std::uint64_t>(c.imag()));
  }
  return hash;
}

// ---------------------------------------------------------------------------
// Weyl to functional calculus.

std::vector<double> weyl_power_correction(int n) {
  if (n < 0) throw SpecError("weyl_power_correction: negative power");
  // t[m][p]: (x xi)^{#m} = sum_p t[m][p] h^p (x xi)^{m-p}.
  const PhaseSpec spec = PhaseSpec::plane(1, 2 * std::max(n, 1));
  const FormalSymbol s = FormalSymbol::term(spec, mono(0, 0, 1, 1));
  std::vector<std::vector<double>> t(static_cast<std::size_t>(n) + 1);
  FormalSymbol power = FormalSymbol::constant(spec, 1.0);
  for (int m = 0; m <= n; ++m) {
    if (m > 0) power = moyal_star(power, s);
    auto& row = t[static_cast<std::size_t>(m)];
    row.assign(static_cast<std::size_t>(m) + 1, 0.0);
    for (const auto& [mo, c] : power.terms()) {
      if (mo.x_pow[0] != mo.xi_pow[0] || mo.x_pow[0] + mo.h_power != m)
        throw SpecError("weyl_power_correction: unexpected term " + to_string(mo));
      row[static_cast<std::size_t>(mo.h_power)] = c.real();
    }
  }
  std::vector<double> d(static_cast<std::size_t>(n) + 1, 0.0);
  d[0] = 1.0;
  for (int r = 1; r <= n; ++r) {
    double acc = 0.0;
    for (int p = 0; p < r; ++p)
      acc += d[static_cast<std::size_t>(p)] *
             t[static_cast<std::size_t>(n - p)][static_cast<std::size_t>(r - p)];
    d[static_cast<std::size_t>(r)] = -acc;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Closed orbit.

Averaging average_mu(const TauSeries& f, const FormalSymbol& mu_t) {
  const PhaseSpec& spec = mu_t.spec();
  if (!spec.has_angle) throw SpecError("average_mu: needs the cylinder phase space");
  const int order = spec.tau_max;
  const TauSeries fp = f.resized(order + 1).derivative().resized(order);
  if (std::abs(fp[0]) == 0.0) throw DegeneracyError("average_mu: f'(0) vanishes");
  const TauSeries inv_fp = fp.reciprocal();
  Averaging out{FormalSymbol(spec), TauSeries(order)};
  std::map<int, TauSeries> modes;
  for (const auto& [m, c] : mu_t.terms()) {
    if (m.degree() != 0 || m.h_power != 0)
      throw SpecError("average_mu: mu(t, tau) must not depend on x, xi or h");
    auto [it, ins] = modes.try_emplace(m.twice_mode, TauSeries(order));
    it->second[m.tau_power] += c;
  }
  for (const auto& [twice_mode, g] : modes) {
    if (twice_mode == 0) {
      out.mu_bar = g;
      continue;
    }
    const TauSeries lam = g * inv_fp * (1.0 / (kI * (0.5 * twice_mode)));
    out.lambda += FormalSymbol::from_tau_series(spec, lam, mono(twice_mode, 0, 0, 0));
  }
  return out;
}

BnfResult closed_orbit_bnf(const CylinderModel& model, int N, const BnfOptions& opts) {
  if (N < 2) throw ConfigError("closed_orbit_bnf: N must be at least 2");
  validate(model);
  const int gmax = N + std::max(0, opts.grade_slack);
  const PhaseSpec spec = PhaseSpec::cylinder(gmax, model.orientable, working_tau(opts, gmax));
  const TauSeries f = model.f.resized(spec.tau_max + 1);
  const FormalSymbol P = cylinder_symbol(model, spec);

  auto solve = [&](const FormalSymbol& current, const FormalSymbol& v) {
    // mu-bar is the resonant x xi coefficient, fixed once the grade-2 step is done.
    TauSeries mu_bar(spec.tau_max);
    for (const auto& [m, c] : current.terms())
      if (m.twice_mode == 0 && m.x_pow[0] == 1 && m.xi_pow[0] == 1 && m.h_power == 0)
        mu_bar[m.tau_power] += c;
    return homological_solve(v, f, mu_bar);
  };
  GeneratorChain chain = run_loop(P, 2, N, opts.series, solve);

  NormalFormPoly nf;
  nf.kind = NormalFormKind::ClosedOrbit;
  nf.order = N;
  nf.action = model.action;
  nf.energy = model.energy;
  nf.orientable = model.orientable;
  for (const auto& [m, c] : chain.weyl_normal_form.terms()) {
    const int b = m.x_pow[0];
    const std::vector<double> d = weyl_power_correction(b);
    for (int p = 0; p <= b; ++p) {
      if (d[static_cast<std::size_t>(p)] == 0.0) continue;
      nf.coeffs[{m.tau_power, b - p, m.h_power + p}] += c * d[static_cast<std::size_t>(p)];
    }
  }
  std::erase_if(nf.coeffs, [](const auto& kv) { return kv.second == Complex{0.0}; });
  return {std::move(nf), std::move(chain)};
}

// ---------------------------------------------------------------------------
// Equilibrium.

FormalSymbol birkhoff_coordinates(const FormalSymbol& scaled) {
  const double r = 1.0 / std::numbers::sqrt2;
  const std::array<std::array<Complex, 2>, 2> m{{{Complex{r}, kI * r}, {kI * r, Complex{r}}}};
  FormalSymbol s = scaled;
  for (int pair = 0; pair < scaled.spec().num_pairs; ++pair) s = linear_substitute(s, pair, m);
  return s;
}

BnfResult equilibrium_bnf(const SaddleModel& model, int N, const BnfOptions& opts) {
  if (N < 2) throw ConfigError("equilibrium_bnf: N must be at least 2");
  validate(model);
  const int gmax = N + std::max(0, opts.grade_slack);
  const PhaseSpec spec = PhaseSpec::plane(2, gmax);
  const std::array<Complex, 2> nu{Complex{model.lambda1}, kI * model.lambda2};
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) {
      if (n1 == 0 && n2 == 0) continue;
      if (std::abs(nu[0] * double(n1) + nu[1] * double(n2)) <
          std::min(model.lambda1, model.lambda2) * (1.0 - 1e-12))
        throw DegeneracyError("equilibrium_bnf: small homological denominator");
    }
  const FormalSymbol P = birkhoff_coordinates(complex_scale(saddle_symbol(model, spec)));
  const FormalSymbol quadratic = P.grade_part(2);
  for (const auto& [m, c] : quadratic.terms())
    if (!m.is_resonant() && std::abs(c) > 1e-12 * relative_scale(P))
      throw ConfigError("equilibrium_bnf: quadratic part is not diagonal: " + to_string(m));

  auto solve = [&](const FormalSymbol&, const FormalSymbol& v) { return homological_solve(v, nu); };
  GeneratorChain chain = run_loop(P, 3, N, opts.series, solve);

  NormalFormPoly nf;
  nf.kind = NormalFormKind::Equilibrium;
  nf.order = N;
  nf.energy = model.energy;
  // (x' xi')^b = (iota / i)^b.
  for (const auto& [m, c] : chain.weyl_normal_form.terms()) {
    const int b1 = m.x_pow[0], b2 = m.x_pow[1];
    const std::vector<double> d1 = weyl_power_correction(b1);
    const std::vector<double> d2 = weyl_power_correction(b2);
    for (int p1 = 0; p1 <= b1; ++p1)
      for (int p2 = 0; p2 <= b2; ++p2) {
        const double w = d1[static_cast<std::size_t>(p1)] * d2[static_cast<std::size_t>(p2)];
        if (w == 0.0) continue;
        const int e1 = b1 - p1, e2 = b2 - p2;
        nf.coeffs[{e1, e2, m.h_power + p1 + p2}] += c * w * std::pow(kI, -(e1 + e2));
      }
  }
  std::erase_if(nf.coeffs, [](const auto& kv) { return kv.second == Complex{0.0}; });
  return {std::move(nf), std::move(chain)};
}

FormalSymbol replay(const GeneratorChain& chain) {
  FormalSymbol P = chain.input;
  for (const auto& step : chain.steps) P = moyal_conjugate(P, step.generator);
  return P;
}

// ---------------------------------------------------------------------------

OrbitDiagnostics orbit_diagnostics(const TauSeries& f, const TauSeries& mu, double E,
                                   double tau_window) {
  const TauSeries fp = f.derivative();
  if (!(fp[0].real() > 0.0)) throw ConfigError("orbit_diagnostics: f'(0) must be positive");
  const Complex lo = f(-tau_window), hi = f(tau_window);
  if (E < std::min(lo.real(), hi.real()) || E > std::max(lo.real(), hi.real()))
    throw ConfigError("orbit_diagnostics: energy " + fmt(E) + " outside the image of f");
  double tau = 0.0;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const double step = ((f(tau) - E) / fp(tau)).real();
    tau -= step;
    if (std::abs(tau) > tau_window)
      throw ConfigError("orbit_diagnostics: Newton left the tau window");
    if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(tau))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError("orbit_diagnostics: Newton did not converge");
  OrbitDiagnostics d;
  d.tau = tau;
  d.period = 2.0 * std::numbers::pi / fp(tau).real();
  d.floquet = std::exp(d.period * mu(tau).real());
  return d;
}

}  // namespace qbnf
