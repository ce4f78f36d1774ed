#include "qbnf/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbnf/error.hpp"

namespace qbnf {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int symbol_grade(const FormalSymbol& s) { return s.empty() ? 0 : s.max_grade(); }

int symbol_tau(const FormalSymbol& s) {
  int a = 0;
  for (const auto& [m, c] : s.terms()) a = std::max(a, m.tau_power);
  return a;
}

}  // namespace

FormalSymbol quantizable_symbol(const Model& model) {
  return std::visit(
      Overloaded{
          [](const CylinderModel& m) {
            const int g = std::max(2, symbol_grade(m.perturbation));
            const int t = std::max({m.f.order(), m.mu.order(), symbol_tau(m.perturbation)});
            const PhaseSpec spec = PhaseSpec::cylinder(g, m.orientable, t);
            return metaplectic_substitute(cylinder_symbol(m, spec));
          },
          [](const SaddleModel& m) {
            const PhaseSpec spec = PhaseSpec::plane(2, std::max(2, symbol_grade(m.higher)));
            return complex_scale(saddle_symbol(m, spec));
          }},
      model);
}

OperatorMatrix assemble_model(const Model& model, const BasisSpec& basis) {
  const FormalSymbol s = quantizable_symbol(model);
  return std::holds_alternative<CylinderModel>(model) ? assemble_cylinder(s, basis)
                                                      : assemble_saddle(s, basis);
}

BnfResult normal_form(const Model& model, int N, const BnfOptions& opts) {
  return std::visit(Overloaded{[&](const CylinderModel& m) { return closed_orbit_bnf(m, N, opts); },
                               [&](const SaddleModel& m) { return equilibrium_bnf(m, N, opts); }},
                    model);
}

ResonanceLattice model_lattice(const Model& model, const NormalFormPoly& nf, double h,
                               const Window& window, const LatticeOptions& opts) {
  return std::holds_alternative<CylinderModel>(model) ? closed_orbit_lattice(nf, h, window, opts)
                                                      : saddle_lattice(nf, h, window, opts);
}

double default_match_radius(const ResonanceLattice& lattice) {
  double d = std::numeric_limits<double>::infinity();
  const auto& e = lattice.entries;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) d = std::min(d, std::abs(e[i].z - e[j].z));
  return 0.45 * d;
}

MatchReport match_lattices(const ResonanceLattice& predicted, const std::vector<Complex>& computed,
                           double radius) {
  MatchReport r;
  r.h = predicted.h;
  r.radius = radius > 0.0 ? radius : default_match_radius(predicted);
  const auto& P = predicted.entries;
  auto nearest_comp = [&](Complex z) {
    std::size_t best = computed.size();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < computed.size(); ++i) {
      const double d = std::abs(computed[i] - z);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };
  auto nearest_pred = [&](Complex z) {
    std::size_t best = P.size();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < P.size(); ++i) {
      const double d = std::abs(P[i].z - z);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };
  std::vector<bool> used(computed.size(), false);
  for (std::size_t i = 0; i < P.size(); ++i) {
    const std::size_t c = nearest_comp(P[i].z);
    if (c < computed.size() && nearest_pred(computed[c]) == i &&
        std::abs(computed[c] - P[i].z) <= r.radius) {
      used[c] = true;
      r.pairs.push_back({P[i].k, P[i].l, P[i].z, computed[c], std::abs(computed[c] - P[i].z)});
    } else {
      r.unmatched_predicted.push_back(P[i]);
    }
  }
  for (std::size_t c = 0; c < computed.size(); ++c)
    if (!used[c]) r.unmatched_computed.push_back(computed[c]);
  double sum = 0.0;
  for (const auto& p : r.pairs) {
    r.max_err = std::max(r.max_err, p.error);
    sum += p.error;
  }
  r.mean_err = r.pairs.empty() ? 0.0 : sum / static_cast<double>(r.pairs.size());
  return r;
}

double max_nearest_distance(const std::vector<Complex>& points, const ResonanceLattice& lattice) {
  double worst = 0.0;
  for (Complex z : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : lattice.entries) best = std::min(best, std::abs(e.z - z));
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Complex> DirectSpectrum::in_window(const Window& w) const {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
    if (stable[i] && w.contains(spectrum.eigenvalues[i])) out.push_back(spectrum.eigenvalues[i]);
  return out;
}

DirectSpectrum direct_spectrum(const Model& model, const BasisSpec& basis, const DirectOptions& opts) {
  const FormalSymbol s = quantizable_symbol(model);
  const bool cyl = std::holds_alternative<CylinderModel>(model);
  auto assemble = [&](const BasisSpec& b) { return cyl ? assemble_cylinder(s, b) : assemble_saddle(s, b); };
  DirectSpectrum out{eigenvalues(assemble(basis), opts.eigen), {}, basis};
  out.stable.assign(out.spectrum.eigenvalues.size(), true);
  if (!opts.check_stability) return out;
  const Spectrum big = eigenvalues(assemble(basis.enlarged(opts.extra_levels, opts.extra_k)), opts.eigen);
  for (std::size_t i = 0; i < out.spectrum.eigenvalues.size(); ++i) {
    const Complex z = out.spectrum.eigenvalues[i];
    double best = std::numeric_limits<double>::infinity();
    for (Complex w : big.eigenvalues) best = std::min(best, std::abs(w - z));
    out.stable[i] = best <= opts.stability_tol * std::max(1.0, std::abs(z));
  }
  return out;
}

SweepResult fit_convergence(std::vector<double> h, std::vector<double> errors) {
  if (h.size() != errors.size() || h.size() < 2)
    throw ConfigError("fit_convergence: need at least two (h, error) points");
  SweepResult r;
  r.h = h;
  r.errors = errors;
  r.exact = std::all_of(errors.begin(), errors.end(), [](double e) { return e < 1e-11; });
  if (r.exact) return r;
  auto fit = [](const std::vector<double>& hs, const std::vector<double>& es, double& slope,
                double& icept) {
    const double n = static_cast<double>(hs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double x = std::log(hs[i]), y = std::log(std::max(es[i], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    icept = (sy - slope * sx) / n;
  };
  double slope = 0.0, icept = 0.0;
  fit(h, errors, slope, icept);
  if (h.size() >= 3) {
    double ss = 0.0;
    std::vector<double> res(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      res[i] = std::log(std::max(errors[i], 1e-300)) - (icept + slope * std::log(h[i]));
      ss += res[i] * res[i];
    }
    const double rms = std::sqrt(ss / static_cast<double>(h.size()));
    const std::size_t big = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
    if (std::abs(res[big]) > 3.0 * rms) {
      h.erase(h.begin() + static_cast<std::ptrdiff_t>(big));
      errors.erase(errors.begin() + static_cast<std::ptrdiff_t>(big));
      fit(h, errors, slope, icept);
      r.discarded_largest = true;
    }
  }
  r.slope = slope;
  return r;
}

SweepResult convergence_sweep(const Model& model, int N, const std::vector<double>& h_list,
                              const SweepOptions& opts) {
  if (h_list.size() < 3) throw ConfigError("convergence_sweep: need at least three h values");
  if (!opts.basis_for) throw ConfigError("convergence_sweep: no basis provider");
  const BnfResult bnf = normal_form(model, N, opts.bnf);
  std::vector<double> errors;
  std::vector<MatchReport> reports;
  for (double h : h_list) {
    const ResonanceLattice lat = model_lattice(model, bnf.normal_form, h, opts.window, opts.lattice);
    const DirectSpectrum ds = direct_spectrum(model, opts.basis_for(h), opts.direct);
    const double radius = default_match_radius(lat);
    MatchReport rep = match_lattices(lat, ds.in_window(opts.window.grown(radius)), radius);
    rep.N = N;
    double e = 0.0;
    for (const auto& p : rep.pairs)
      if (std::abs(p.k) <= opts.max_k && p.l <= opts.max_l) e = std::max(e, p.error);
    for (const auto& u : rep.unmatched_predicted)
      if (std::abs(u.k) <= opts.max_k && u.l <= opts.max_l)
        throw ConvergenceError("convergence_sweep: low-lying lattice point (" + std::to_string(u.k) +
                               ", " + std::to_string(u.l) + ") has no direct partner");
    errors.push_back(e);
    reports.push_back(std::move(rep));
  }
  SweepResult r = fit_convergence(h_list, errors);
  r.h = h_list;
  r.errors = errors;
  r.reports = std::move(reports);
  return r;
}

}  // namespace qbnf
