#include <benchmark/benchmark.h>

#include "snls/evolve.hpp"
#include "snls/ground_state.hpp"
#include "snls/modulation.hpp"
#include "snls/noise.hpp"
#include "snls/path.hpp"

namespace {

using namespace snls;

void BM_StrangStep(benchmark::State& st) {
  const Grid g = make_grid(1, 20.0, static_cast<int>(st.range(0)));
  ComplexField X = ground_state_1d(g).as_complex();
  for (auto _ : st) {
    X = strang_step(std::move(X), 1e-3);
    benchmark::DoNotOptimize(X.values.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_StrangStep)->RangeMultiplier(4)->Range(512, 1 << 15);

void BM_StepperAdvance(benchmark::State& st) {
  const Grid g = make_grid(1, 20.0, static_cast<int>(st.range(0)));
  PhiFamily phi;
  phi.bumps = {{0.1, {0.0, 0.0}, 1.0}, {0.05, {1.0, 0.0}, 0.5}};
  const NoiseRealization noise(phi, 1.0 / 64.0, 3);
  EvolveState state;
  state.X = ground_state_1d(g).as_complex();
  state.dt = kTicksPerBase >> 6;
  Stepper stepper(noise);
  for (auto _ : st) benchmark::DoNotOptimize(stepper.advance(state, 20));
  st.SetItemsProcessed(st.iterations() * 20);
}
BENCHMARK(BM_StepperAdvance)->Arg(512)->Arg(4096);

void BM_Step2d(benchmark::State& st) {
  const Grid g = make_grid(2, 12.0, static_cast<int>(st.range(0)));
  ComplexField X = sample(g, [](Point x) { return cplx{std::exp(-x[0] * x[0] - x[1] * x[1]), 0.0}; });
  for (auto _ : st) {
    X = strang_step(std::move(X), 1e-3);
    benchmark::DoNotOptimize(X.values.data());
  }
}
BENCHMARK(BM_Step2d)->Arg(128)->Arg(256);

void BM_Decompose(benchmark::State& st) {
  const GroundState gs = reference_ground_state(1);
  const Grid g = make_grid(1, 20.0, static_cast<int>(st.range(0)));
  const ModulationParams p{0.3, 0.15, {0.4, 0.0}, 0.9};
  const ComplexField u = ansatz_field(p, *gs.profile, g);
  const ModulationParams guess{0.31, 0.14, {0.41, 0.0}, 0.88};
  for (auto _ : st) benchmark::DoNotOptimize(decompose(u, guess, gs).lambda);
}
BENCHMARK(BM_Decompose)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_GroundState1d(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference_ground_state(1).mass);
}
BENCHMARK(BM_GroundState1d)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
