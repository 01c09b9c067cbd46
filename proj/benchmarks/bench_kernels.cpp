#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "isomix/closure.hpp"
#include "isomix/solver.hpp"
#include "isomix/thermo.hpp"
#include "isomix/verify.hpp"

namespace {

isomix::Thermodynamics mixture(std::size_t n) {
  return isomix::Thermodynamics(isomix::MixtureSpec::ideal(isomix::reference_vbar(n)));
}

void BM_DualSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto th = mixture(n);
  isomix::Vector mu = isomix::Vector::LinSpaced(static_cast<Eigen::Index>(n), -1.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(th.dual_solve(mu));
  }
}
BENCHMARK(BM_DualSolve)->Arg(2)->Arg(3)->Arg(4);

void BM_MapR(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto th = mixture(n);
  const double varrho = 0.5 * (th.varrho_min() + th.varrho_max());
  const isomix::Vector q = isomix::Vector::Constant(static_cast<Eigen::Index>(n - 2), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(th.map_r(varrho, q));
  }
}
BENCHMARK(BM_MapR)->Arg(2)->Arg(3)->Arg(4);

void BM_MaxwellStefanReduction(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto th = mixture(n);
  const auto closure = isomix::ClosureModel::maxwell_stefan(isomix::reference_diffusivities(n));
  const double varrho = 0.5 * (th.varrho_min() + th.varrho_max());
  const isomix::Vector q = isomix::Vector::Constant(static_cast<Eigen::Index>(n - 2), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(isomix::reduce_closure(closure, th, varrho, q));
  }
}
BENCHMARK(BM_MaxwellStefanReduction)->Arg(3)->Arg(4);

// One time step of the ternary problem with a smooth non-uniform state.
void BM_PicardStep(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  const auto th = mixture(3);
  const isomix::Grid1D grid(cells, 1.0);
  isomix::SolverSettings settings;
  settings.dt = 1e-3;
  isomix::PicardSolver solver(th, isomix::ClosureModel::quasi_diagonal(1.0), grid, {}, settings);
  isomix::DiscreteState s;
  const auto n = static_cast<Eigen::Index>(cells);
  s.varrho.resize(n);
  s.q.resize(1, n);
  s.zeta = isomix::Vector::Zero(n);
  s.v = isomix::Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = grid.center(static_cast<std::size_t>(i));
    s.varrho[i] = 0.55 + 0.1 * std::cos(std::numbers::pi * x);
    s.q(0, i) = 0.3 * std::cos(2.0 * std::numbers::pi * x);
  }
  const auto init = solver.initialize(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.advance(init.state));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cells));
}
BENCHMARK(BM_PicardStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
