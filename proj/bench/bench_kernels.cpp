// Serial against OpenMP for the grid kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "cdef/builtins.hpp"
#include "cdef/conformal.hpp"
#include "cdef/lightcone.hpp"
#include "cdef/pair.hpp"

namespace {

using namespace cdef;

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

Grid box(int n, int count, double half) {
  return Grid(Vec::Constant(n, -half), Vec::Constant(n, half), std::vector<int>(n, count));
}

void BM_SampleJets(benchmark::State& s) {
  const auto f = torus(2.0, 0.5);
  const Grid g = box(2, 40, 0.5);
  for (auto _ : s) benchmark::DoNotOptimize(sample(f, g, 3, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(g.size()));
}

void BM_FundamentalData(benchmark::State& s) {
  const Grid g = box(3, 8, 0.3);
  const auto j = sample(sphere(3, 2.0), g, 3, Exec::serial);
  CalculusOptions o;
  o.exec = exec_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(fundamental_data(j, o));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(g.size()));
}

void BM_PositionIdentities(benchmark::State& s) {
  const Grid g = box(2, 30, 0.4);
  const auto lift = psi_lift(inversion(cylinder(2), (Vec(3) << 0.2, 0.1, 3.0).finished()));
  for (auto _ : s) benchmark::DoNotOptimize(position_identities(lift, g, Vec(), Tolerance{}, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(g.size()));
}

void BM_ConstructPair(benchmark::State& s) {
  PairOptions o;
  o.exec = exec_of(s);
  const PairPipeline pipe(flat_torus(1.0, 2.0), flat_torus(0.7, 2.0), o);
  const Grid g = box(2, 5, 0.1);
  for (auto _ : s) benchmark::DoNotOptimize(construct_TD(pipe, g));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(g.size()));
}

void BM_ConformalSff(benchmark::State& s) {
  const Grid g = box(3, 8, 0.2);
  const auto j = sample(cylinder(3), g, 3, Exec::serial);
  const auto D = DistributionFrame::build(g, [](const Vec&) { return Mat(Mat::Identity(3, 3).rightCols(2)); },
                                          Tolerance{}, 2e-3, Exec::serial);
  for (auto _ : s) benchmark::DoNotOptimize(conformal_sff(j, D, Tolerance{}, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<long>(g.size()));
}

BENCHMARK(BM_SampleJets)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FundamentalData)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PositionIdentities)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConstructPair)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConformalSff)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
