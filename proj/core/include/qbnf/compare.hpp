#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "qbnf/eigensolve.hpp"
#include "qbnf/lattice.hpp"
#include "qbnf/normal_form.hpp"
#include "qbnf/quantize.hpp"

namespace qbnf {

using Model = std::variant<CylinderModel, SaddleModel>;

/// The model symbol without truncation, ready for assembly (metaplectic or complex-scaled).
FormalSymbol quantizable_symbol(const Model& model);
OperatorMatrix assemble_model(const Model& model, const BasisSpec& basis);
BnfResult normal_form(const Model& model, int N, const BnfOptions& opts = {});
ResonanceLattice model_lattice(const Model& model, const NormalFormPoly& nf, double h,
                               const Window& window, const LatticeOptions& opts = {});

struct MatchPair {
  int k = 0;
  int l = 0;
  Complex predicted;
  Complex computed;
  double error = 0.0;
};

struct MatchReport {
  std::vector<MatchPair> pairs;
  std::vector<LatticeEntry> unmatched_predicted;
  std::vector<Complex> unmatched_computed;
  double max_err = 0.0;
  double mean_err = 0.0;
  double radius = 0.0;
  double h = 0.0;
  int N = 0;
};

/// 0.45 times the smallest pairwise distance in the lattice (infinity for < 2 points).
double default_match_radius(const ResonanceLattice& lattice);

/// Mutual nearest neighbours within radius; radius <= 0 selects the default.
MatchReport match_lattices(const ResonanceLattice& predicted, const std::vector<Complex>& computed,
                           double radius = -1.0);

/// max over `points` of the distance to the nearest lattice entry.
double max_nearest_distance(const std::vector<Complex>& points, const ResonanceLattice& lattice);

struct DirectOptions {
  /// Eigenvalues moving by more than stability_tol * max(1, |z|) under basis enlargement
  /// are flagged unstable.
  double stability_tol = 1e-8;
  int extra_levels = 10;
  int extra_k = 5;
  bool check_stability = true;
  EigenOptions eigen{};
};

struct DirectSpectrum {
  Spectrum spectrum;
  std::vector<bool> stable;
  BasisSpec basis;

  /// Stable eigenvalues inside the window.
  std::vector<Complex> in_window(const Window& w) const;
};

DirectSpectrum direct_spectrum(const Model& model, const BasisSpec& basis,
                               const DirectOptions& opts = {});

struct SweepOptions {
  Window window;
  std::function<BasisSpec(double)> basis_for;
  /// Pairs with |k| <= max_k and l <= max_l enter the error.
  int max_k = 3;
  int max_l = 3;
  BnfOptions bnf{};
  DirectOptions direct{};
  LatticeOptions lattice{};
};

struct SweepResult {
  std::vector<double> h;
  std::vector<double> errors;
  std::vector<MatchReport> reports;
  double slope = 0.0;
  bool exact = false;
  bool discarded_largest = false;
};

/// Least-squares slope of log(error) against log(h); drops the largest h when its residual
/// exceeds three times the RMS residual.  Sets exact when every error is below 1e-11.
SweepResult fit_convergence(std::vector<double> h, std::vector<double> errors);

SweepResult convergence_sweep(const Model& model, int N, const std::vector<double>& h_list,
                              const SweepOptions& opts);

}  // namespace qbnf
