// Microbenchmarks for the hot paths: cube navigation, tiling checks, basis
// construction, and full expansions.
#include <benchmark/benchmark.h>

#include "dyadic/bilinear.hpp"

using namespace dyadic;

namespace {

DyadicRational dr(long long m, std::int64_t e = 0) { return DyadicRational(BigInt(m), e); }

DyadicCube unit_cube(int n) {
  DyadicCube q;
  q.scale = 0;
  q.lower_corner.assign(static_cast<std::size_t>(n), DyadicRational());
  return q;
}

Measure bench_atoms(int count) {
  std::vector<Atom> atoms;
  for (int i = 0; i < count; ++i)
    atoms.push_back({{dr(2 * i + 1, -8)}, 1.0 + 0.25 * (i % 4)});
  return Measure::atomic(std::move(atoms), unit_cube(1));
}

Measure bench_lebesgue(int n) {
  return Measure::cell_density({{unit_cube(n), 1.0}}, unit_cube(n));
}

void BM_CubeAt(benchmark::State& state) {
  const GridSpec grid({GridAxis(dr(1, -2), {1, 0, 1}, BitTail::periodic({0, 1}))});
  const Point x{0.3721};
  std::int64_t m = -40;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cube_at(grid, x, m));
    m = m == 40 ? -40 : m + 1;
  }
}
BENCHMARK(BM_CubeAt);

void BM_TopTiling(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<GridAxis> axes;
  for (int k = 0; k < n; ++k)
    axes.emplace_back(dr(1, -2), std::vector<std::uint8_t>{1}, BitTail::one());
  const GridSpec grid(axes);
  DyadicCube box;
  box.scale = 4;
  box.lower_corner.assign(static_cast<std::size_t>(n), dr(-8));
  for (auto _ : state) benchmark::DoNotOptimize(verify_top_tiling(grid, box, 1000));
}
BENCHMARK(BM_TopTiling)->Arg(1)->Arg(2)->Arg(3);

void BM_BuildBasisAtoms(benchmark::State& state) {
  const GridSpec grid = GridSpec::standard(1);
  const Measure mu = bench_atoms(static_cast<int>(state.range(0)));
  const MomentSystem sys = MomentSystem::monomials(2);
  const DyadicCube Q = unit_cube(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_alpert_basis(grid, Q, mu, sys));
}
BENCHMARK(BM_BuildBasisAtoms)->Arg(8)->Arg(32)->Arg(96);

void BM_BuildBasisDensity(benchmark::State& state) {
  const GridSpec grid = GridSpec::standard(1);
  const Measure mu = bench_lebesgue(1);
  const MomentSystem sys = MomentSystem::monomials(static_cast<int>(state.range(0)));
  const DyadicCube Q = unit_cube(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_alpert_basis(grid, Q, mu, sys));
}
BENCHMARK(BM_BuildBasisDensity)->Arg(1)->Arg(2)->Arg(3);

void BM_Expand(benchmark::State& state) {
  const GridSpec grid = GridSpec::standard(1);
  const Measure mu = bench_atoms(64);
  const MomentSystem sys = MomentSystem::monomials(2);
  PiecewisePolyFn f(sys, 1,
                    {{DyadicCube{-1, {dr(0)}}, {1.0, 0.4}}, {DyadicCube{-1, {dr(1, -1)}}, {-0.7, 0.2}}});
  const std::int64_t m_min = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(expand(f, grid, mu, sys, {.m_min = m_min, .m_max = 1, .threads = 1}));
}
BENCHMARK(BM_Expand)->Arg(-7)->Arg(-9);

void BM_FormTops(benchmark::State& state) {
  const GridSpec grid = GridSpec::standard(1);
  const Measure sigma = bench_atoms(static_cast<int>(state.range(0)));
  const Measure omega = bench_atoms(16);
  const MomentSystem sys = MomentSystem::monomials(1);
  const PiecewisePolyFn one = PiecewisePolyFn::constant(sys, unit_cube(1), 1.0);
  const KernelSpec K = KernelSpec::hilbert();
  for (auto _ : state)
    benchmark::DoNotOptimize(form_tops(grid, sys, one, one, sigma, omega, K, {0, -9}));
}
BENCHMARK(BM_FormTops)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
