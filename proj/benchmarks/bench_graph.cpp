#include <benchmark/benchmark.h>

#include <random>

#include "netdist/graph.hpp"

using namespace netdist;

namespace {

std::vector<DeviceId> ids(std::size_t n) {
  SeededEntropy e(1);
  std::vector<DeviceId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(DeviceId::generate(e));
  return out;
}

/// Sparse random graph with mean degree about `degree`.
ContactGraph random_graph(std::size_t n, double degree) {
  const auto nodes = ids(n);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<ContactEdge> edges;
  const auto m = static_cast<std::size_t>(degree * static_cast<double>(n) / 2);
  for (std::size_t k = 0; k < m; ++k) {
    const auto a = pick(rng);
    const auto b = pick(rng);
    if (a == b) continue;
    edges.push_back({std::min(nodes[a], nodes[b]), std::max(nodes[a], nodes[b]), 0});
  }
  return ContactGraph::build(nodes, std::move(edges), 0);
}

void BM_Build(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, 10);
  for (auto _ : state) {
    auto copy = ContactGraph::build(g.nodes(), g.edges(), 0);
    benchmark::DoNotOptimize(copy);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edge_count()));
}
BENCHMARK(BM_Build)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Distance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, 10);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.distance(g.device(pick(rng)), g.device(pick(rng))));
  }
}
BENCHMARK(BM_Distance)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMicrosecond);

void BM_Histogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, 10);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.user_count_histogram(g.device(i++ % n)));
  }
}
BENCHMARK(BM_Histogram)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace
