#include "qbnf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <tuple>

#include "qbnf/error.hpp"

namespace qbnf {
namespace {

const Complex kI{0.0, 1.0};

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Leading part f(tau) = sum_a c[a,0,0] tau^a.
Complex leading_f(const NormalFormPoly& nf, double tau) {
  Complex acc{0.0};
  for (const auto& [k, c] : nf.coeffs)
    if (k[1] == 0 && k[2] == 0) acc += c * std::pow(tau, k[0]);
  return acc;
}

double centre_tau(const NormalFormPoly& nf, double E) {
  double tau = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double f = leading_f(nf, tau).real();
    double fp = 0.0;
    for (const auto& [k, c] : nf.coeffs)
      if (k[1] == 0 && k[2] == 0 && k[0] > 0) fp += k[0] * c.real() * std::pow(tau, k[0] - 1);
    if (!(fp > 0.0)) return 0.0;
    const double step = (f - E) / fp;
    tau -= step;
    if (!std::isfinite(tau)) return 0.0;
    if (std::abs(step) < 1e-13) break;
  }
  return tau;
}

}  // namespace

void Window::validate() const {
  if (!(half_width > 0.0) || !(depth > 0.0))
    throw ConfigError("window: eps0 and eps1 must be positive");
}

bool Window::contains(Complex z) const {
  return z.real() > center - half_width && z.real() < center + half_width &&
         z.imag() > -depth && z.imag() <= im_tol;
}

Window Window::grown(double margin) const {
  Window w = *this;
  w.half_width += margin;
  w.depth += margin;
  w.im_tol += margin;
  return w;
}

ResonanceLattice closed_orbit_lattice(const NormalFormPoly& nf, double h, const Window& window,
                                      const LatticeOptions& opts) {
  if (nf.kind != NormalFormKind::ClosedOrbit)
    throw SpecError("closed_orbit_lattice: needs a closed-orbit normal form");
  if (!(h > 0.0)) throw ConfigError("closed_orbit_lattice: h must be positive");
  window.validate();
  ResonanceLattice out{{}, window, h, hex(nf.fingerprint())};
  const double offset = -nf.action / (2.0 * std::numbers::pi);
  const double grow = 1.0 + opts.margin;

  const double mu0 = std::abs(nf.coefficient(0, 1, 0));
  int l_max = opts.max_level;
  if (mu0 > 0.0)
    l_max = std::min(l_max, static_cast<int>(std::ceil(grow * window.depth / (mu0 * h))));
  const double tau_c = centre_tau(nf, window.center);

  for (int l = 0; l <= l_max; ++l) {
    const double shift = nf.orientable ? 0.0 : 0.5 * l;
    const Complex iota = (l + 0.5) * h / kI;
    const int k0 = static_cast<int>(std::lround((tau_c - offset) / h - shift));
    auto tau_of = [&](int k) { return h * (k + shift) + offset; };
    auto inside_leading = [&](int k) {
      return std::abs(leading_f(nf, tau_of(k)).real() - window.center) < grow * window.half_width;
    };
    auto visit = [&](int k) {
      const Complex z = nf.evaluate(tau_of(k), iota, h);
      if (window.contains(z)) out.entries.push_back({k, l, z});
    };
    for (int k = k0; k - k0 <= opts.max_k_span && inside_leading(k); ++k) visit(k);
    for (int k = k0 - 1; k0 - k <= opts.max_k_span && inside_leading(k); --k) visit(k);
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const LatticeEntry& a, const LatticeEntry& b) {
    return std::tie(a.l, a.k) < std::tie(b.l, b.k);
  });
  return out;
}

ResonanceLattice saddle_lattice(const NormalFormPoly& nf, double h, const Window& window,
                                const LatticeOptions& opts) {
  if (nf.kind != NormalFormKind::Equilibrium)
    throw SpecError("saddle_lattice: needs an equilibrium normal form");
  if (!(h > 0.0)) throw ConfigError("saddle_lattice: h must be positive");
  window.validate();
  ResonanceLattice out{{}, window, h, hex(nf.fingerprint())};

  // Leading part c0 + c1 s1 + c2 s2; bound s1, s2 over the window corners.
  const Complex c0 = nf.coefficient(0, 0, 0);
  const Complex c1 = nf.coefficient(1, 0, 0);
  const Complex c2 = nf.coefficient(0, 1, 0);
  const double det = c1.real() * c2.imag() - c1.imag() * c2.real();
  int k_max = opts.max_level, l_max = opts.max_level;
  if (std::abs(det) > 1e-14 * std::abs(c1) * std::abs(c2)) {
    double s1 = 0.0, s2 = 0.0;
    for (double re : {window.center - window.half_width, window.center + window.half_width})
      for (double im : {-window.depth, window.im_tol}) {
        const Complex w = Complex{re, im} - c0;
        s1 = std::max(s1, (w.real() * c2.imag() - w.imag() * c2.real()) / det);
        s2 = std::max(s2, (c1.real() * w.imag() - c1.imag() * w.real()) / det);
      }
    const double grow = 1.0 + opts.margin;
    k_max = std::min(k_max, static_cast<int>(std::ceil(grow * s1 / h)));
    l_max = std::min(l_max, static_cast<int>(std::ceil(grow * s2 / h)));
  }
  for (int k = 0; k <= k_max; ++k)
    for (int l = 0; l <= l_max; ++l) {
      const Complex z = nf.evaluate((k + 0.5) * h, (l + 0.5) * h, h);
      if (window.contains(z)) out.entries.push_back({k, l, z});
    }
  return out;
}

Complex rescaled_part(const NormalFormPoly& nf, int j, double u, double v, double eps) {
  const Complex second = nf.kind == NormalFormKind::ClosedOrbit ? Complex{eps * v} / kI
                                                                : Complex{eps * v};
  return nf.evaluate_part(j, eps * u, second) * std::pow(eps, j);
}

double homogeneity_check(const NormalFormPoly& nf, double mu, double eps, int samples,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> positive(0.05, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  const int jmax = nf.max_h_power();
  // Scale for relative errors: the same evaluation with absolute values of all terms.
  auto magnitude = [&](int j, double u, double v, double e) {
    double acc = 0.0;
    for (const auto& [k, c] : nf.coeffs)
      if (k[2] == j) acc += std::abs(c) * std::pow(std::abs(e * u), k[0]) * std::pow(std::abs(e * v), k[1]);
    return acc * std::pow(std::abs(e), j);
  };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double m = mu > 0.0 ? mu : scale(rng);
    const double u = coord(rng);
    const double v = positive(rng);
    for (int j = 0; j <= jmax; ++j) {
      const Complex lhs = rescaled_part(nf, j, u / m, v / m, m * eps);
      const Complex rhs = std::pow(m, j) * rescaled_part(nf, j, u, v, eps);
      const double ref = std::max(magnitude(j, u, v, eps) * std::pow(m, j), 1e-300);
      worst = std::max(worst, std::abs(lhs - rhs) / ref);
    }
    // Rescaled lattice: arguments a/eps, b/eps with weights (h/eps)^j against eps = 1.
    const double hh = 0.01 * positive(rng);
    const double a = coord(rng), b = positive(rng);
    Complex lhs{0.0}, rhs{0.0};
    double ref = 0.0;
    for (int j = 0; j <= jmax; ++j) {
      lhs += rescaled_part(nf, j, a / eps, b / eps, eps) * std::pow(hh / eps, j);
      rhs += rescaled_part(nf, j, a, b, 1.0) * std::pow(hh, j);
      ref += magnitude(j, a, b, 1.0) * std::pow(hh, j);
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(ref, 1e-300));
  }
  return worst;
}

}  // namespace qbnf
