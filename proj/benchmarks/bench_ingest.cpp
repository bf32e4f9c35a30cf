#include <benchmark/benchmark.h>

#include <random>

#include "netdist/ingest.hpp"

using namespace netdist;

namespace {

constexpr Timestamp kNow = 1622505600;

/// BLE meetings among `devices` people over two weeks, five-minute samples.
std::vector<DetectionRecord> meetings(int devices, int count) {
  SeededEntropy e(1);
  std::vector<DeviceId> ids;
  for (int i = 0; i < devices; ++i) ids.push_back(DeviceId::generate(e));
  std::mt19937_64 rng(2);
  std::vector<DetectionRecord> out;
  for (int k = 0; k < count; ++k) {
    const auto a = rng() % ids.size();
    auto b = rng() % ids.size();
    if (a == b) b = (b + 1) % ids.size();
    const Timestamp start = kNow - static_cast<Timestamp>(rng() % (14 * kDay));
    const int minutes = 5 + static_cast<int>(rng() % 40);
    const std::string ta = "m" + std::to_string(k) + "a";
    const std::string tb = "m" + std::to_string(k) + "b";
    for (int m = 0; m <= minutes; m += 5) {
      out.push_back({ids[a], Channel::kBle, ta, tb, start + m * kMinute, -60, std::nullopt, std::nullopt});
      out.push_back({ids[b], Channel::kBle, tb, ta, start + m * kMinute, -60, std::nullopt, std::nullopt});
    }
  }
  return out;
}

void BM_BuildIntervals(benchmark::State& state) {
  const auto records = meetings(2000, static_cast<int>(state.range(0)));
  EventLog log;
  for (const auto& r : records) log.append(r);
  const auto snap = log.snapshot();
  const IngestConfig config;
  const Window window{kNow - config.window(), kNow};
  for (auto _ : state) benchmark::DoNotOptimize(build_intervals(snap, window, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_BuildIntervals)->Arg(1'000)->Arg(20'000)->Unit(benchmark::kMillisecond);

void BM_DeriveEdges(benchmark::State& state) {
  const auto records = meetings(2000, static_cast<int>(state.range(0)));
  EventLog log;
  for (const auto& r : records) log.append(r);
  const IngestConfig config;
  const Window window{kNow - config.window(), kNow};
  const auto intervals = build_intervals(log.snapshot(), window, config);
  for (auto _ : state) benchmark::DoNotOptimize(derive_edges(intervals, window, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(intervals.size()));
}
BENCHMARK(BM_DeriveEdges)->Arg(1'000)->Arg(20'000)->Unit(benchmark::kMillisecond);

void BM_Append(benchmark::State& state) {
  const auto records = meetings(2000, 5'000);
  for (auto _ : state) {
    EventLog log;
    for (const auto& r : records) log.append(r);
    benchmark::DoNotOptimize(log.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_Append)->Unit(benchmark::kMillisecond);

}  // namespace
