#include <benchmark/benchmark.h>

#include <random>

#include "qbnf/compare.hpp"

using namespace qbnf;

namespace {

FormalSymbol random_symbol(const PhaseSpec& spec, std::mt19937_64& rng, int terms) {
  std::uniform_int_distribution<int> deg(0, 3), tau(0, 2), mode(-2, 2), hp(0, 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FormalSymbol s(spec);
  for (int n = 0; n < terms; ++n) {
    Monomial m;
    m.x_pow[0] = deg(rng);
    m.xi_pow[0] = deg(rng);
    m.tau_power = tau(rng);
    m.twice_mode = 2 * mode(rng);
    m.h_power = hp(rng);
    s.add(m, {u(rng), u(rng)});
  }
  return s;
}

CylinderModel cubic_cylinder() {
  CylinderModel m;
  m.perturbation = FormalSymbol(PhaseSpec::cylinder(8));
  Monomial a, b;
  a.twice_mode = 2;
  a.x_pow = {3, 0};
  b.twice_mode = -2;
  b.xi_pow = {3, 0};
  m.perturbation.add(a, 0.1);
  m.perturbation.add(b, 0.1);
  return m;
}

SaddleModel quartic_saddle() {
  SaddleModel m;
  m.lambda2 = std::sqrt(2.0);
  Monomial q;
  q.x_pow = {2, 2};
  m.higher.add(q, 0.2);
  return m;
}

void BM_MoyalStar(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const PhaseSpec sp = PhaseSpec::cylinder(12, true, 8);
  const int terms = static_cast<int>(state.range(0));
  const FormalSymbol a = random_symbol(sp, rng, terms), b = random_symbol(sp, rng, terms);
  for (auto _ : state) benchmark::DoNotOptimize(moyal_star(a, b));
}
BENCHMARK(BM_MoyalStar)->Arg(8)->Arg(32)->Arg(128);

void BM_ClosedOrbitBnf(benchmark::State& state) {
  const CylinderModel m = cubic_cylinder();
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(closed_orbit_bnf(m, N));
}
BENCHMARK(BM_ClosedOrbitBnf)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_EquilibriumBnf(benchmark::State& state) {
  const SaddleModel m = quartic_saddle();
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(equilibrium_bnf(m, N));
}
BENCHMARK(BM_EquilibriumBnf)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_AssembleCylinder(benchmark::State& state) {
  const Model model{cubic_cylinder()};
  const int L = static_cast<int>(state.range(0));
  const BasisSpec b = BasisSpec::cylinder(-25, 25, L, 0.05, 0.0, true);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_model(model, b));
}
BENCHMARK(BM_AssembleCylinder)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_EigenSaddle(benchmark::State& state) {
  const Model model{quartic_saddle()};
  const int L = static_cast<int>(state.range(0));
  const OperatorMatrix M = assemble_model(model, BasisSpec::saddle(L, L, 0.05));
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(M));
}
BENCHMARK(BM_EigenSaddle)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
