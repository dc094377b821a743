// Serial reference against the OpenMP path for the per-node kernels.
// Run with --benchmark_filter=... ; the second argument is 0 serial, 1 parallel.

#include "mcf4d/flow.hpp"
#include "mcf4d/geometry.hpp"
#include "mcf4d/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace mcf4d;

namespace {

SurfaceState torus(int n) {
  ScenarioSpec s;
  s.name = ScenarioName::clifford_torus;
  s.n1 = s.n2 = n;
  return generate_scenario(s);
}

Exec mode(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

void set_nodes(benchmark::State& st) {
  st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
  st.SetLabel(st.range(1) ? "openmp" : "serial");
}

void BM_build_geometry(benchmark::State& st) {
  const auto s = torus(static_cast<int>(st.range(0)));
  BuildOptions opt;
  opt.exec = mode(st);
  opt.with_nabla_j = false;
  for (auto _ : st) benchmark::DoNotOptimize(build_geometry(s, opt));
  set_nodes(st);
}

void BM_build_geometry_with_j(benchmark::State& st) {
  const auto s = torus(static_cast<int>(st.range(0)));
  BuildOptions opt;
  opt.exec = mode(st);
  opt.with_nabla_j = true;
  for (auto _ : st) benchmark::DoNotOptimize(build_geometry(s, opt));
  set_nodes(st);
}

void BM_mean_curvature_velocity(benchmark::State& st) {
  const auto s = torus(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mean_curvature_velocity(s, mode(st)));
  set_nodes(st);
}

void BM_rk4_step(benchmark::State& st) {
  const auto s = torus(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(step(s, 1e-4, mode(st)));
  set_nodes(st);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {32, 64, 128, 256}) {
    for (int par : {0, 1}) b->Args({n, par});
  }
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_build_geometry)->Apply(sizes);
BENCHMARK(BM_build_geometry_with_j)->Apply(sizes);
BENCHMARK(BM_mean_curvature_velocity)->Apply(sizes);
BENCHMARK(BM_rk4_step)->Apply(sizes);

BENCHMARK_MAIN();
