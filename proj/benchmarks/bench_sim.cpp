#include <benchmark/benchmark.h>

#include "netdist/sim/simulation.hpp"

using namespace netdist;
using namespace netdist::sim;

namespace {

void BM_StepDay(benchmark::State& state) {
  PopulationConfig population;
  population.people = static_cast<int>(state.range(0));
  auto world = std::make_shared<const SimWorld>(generate_world(population, 1));
  SimParams params;
  params.use_server = state.range(1) != 0;
  params.behavior = {0.5, 0.5, 0.2, 3, 14};
  for (auto _ : state) {
    state.PauseTiming();
    Simulation sim(world, params, 2);
    state.ResumeTiming();
    for (int d = 0; d < 20; ++d) sim.step_day();
    benchmark::DoNotOptimize(sim.history().back());
  }
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_StepDay)->Args({1000, 0})->Args({1000, 1})->Args({5000, 1})->Unit(benchmark::kMillisecond);

void BM_SampleContacts(benchmark::State& state) {
  PopulationConfig population;
  population.people = static_cast<int>(state.range(0));
  const auto world = generate_world(population, 1);
  int day = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_contacts(world, EpiParams{}, 3, day++));
}
BENCHMARK(BM_SampleContacts)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace
