#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "netdist/graph.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace netdist;
using namespace netdist::test;

namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

EdgeList path_edges(std::uint32_t n) {
  EdgeList e;
  for (std::uint32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

std::vector<DetectionRecord> qualifying(const DeviceId& x, const DeviceId& y, Timestamp t, const std::string& tag) {
  return ble_meeting(x, y, t, 20, tag);
}

}  // namespace

TEST(Snapshot, EmptyLogHasNoEdges) {
  const auto ids = device_ids(3, 1);
  EventLog log;
  const auto g = snapshot(log.snapshot(), ids, kT0, IngestConfig{}, GraphConfig{});
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Snapshot, OneQualifyingPairIsOneEdge) {
  const auto ids = device_ids(3, 1);
  EventLog log;
  for (const auto& r : qualifying(ids[0], ids[1], kT0 - kDay, "q")) log.append(r);
  const auto g = snapshot(log.snapshot(), ids, kT0, IngestConfig{}, GraphConfig{});
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.degree(*g.index_of(ids[0])), 1u);
  EXPECT_EQ(g.degree(*g.index_of(ids[1])), 1u);
  EXPECT_EQ(g.degree(*g.index_of(ids[2])), 0u);
}

TEST(Snapshot, FifteenDayOldEdgeIsGone) {
  const auto ids = device_ids(2, 1);
  EventLog log;
  for (const auto& r : qualifying(ids[0], ids[1], kT0 - 15 * kDay, "q")) log.append(r);
  EXPECT_EQ(snapshot(log.snapshot(), ids, kT0, IngestConfig{}, GraphConfig{}).edge_count(), 0u);
  EXPECT_EQ(snapshot(log.snapshot(), ids, kT0 - 2 * kDay, IngestConfig{}, GraphConfig{}).edge_count(), 1u);
}

TEST(Snapshot, IsolatedFromLaterIngestion) {
  const auto ids = device_ids(3, 1);
  EventLog log;
  for (const auto& r : qualifying(ids[0], ids[1], kT0 - kDay, "q")) log.append(r);
  const auto before = log.snapshot();
  for (const auto& r : qualifying(ids[1], ids[2], kT0 - kDay, "r")) log.append(r);
  EXPECT_EQ(snapshot(before, ids, kT0, IngestConfig{}, GraphConfig{}).edge_count(), 1u);
  EXPECT_EQ(snapshot(log.snapshot(), ids, kT0, IngestConfig{}, GraphConfig{}).edge_count(), 2u);
}

TEST(Build, DropsSelfLoopsAndDuplicatesAndAddsEndpoints) {
  const auto ids = device_ids(3, 2);
  const auto a = std::min(ids[0], ids[1]);
  const auto b = std::max(ids[0], ids[1]);
  const std::vector<ContactEdge> edges{{a, b, 1}, {a, b, 2}, {a, a, 3}, {std::min(b, ids[2]), std::max(b, ids[2]), 4}};
  const auto g = ContactGraph::build({ids[0]}, edges, kT0);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(std::is_sorted(g.nodes().begin(), g.nodes().end()));
}

TEST(Distance, DirectContactIsOne) {
  const auto ids = device_ids(2, 3);
  const auto g = graph_of(ids, {{0, 1}});
  EXPECT_EQ(g.distance(ids[0], ids[1]), NetworkDistance::hops(1));
  EXPECT_EQ(g.distance(ids[0], ids[0]), NetworkDistance::hops(0));
}

TEST(Distance, CommonNeighbourIsTwo) {
  const auto ids = device_ids(3, 3);
  const auto g = graph_of(ids, {{0, 2}, {1, 2}});
  EXPECT_EQ(g.distance(ids[0], ids[1]), NetworkDistance::hops(2));
}

TEST(Distance, PathLongerThanTheCapIsBeyond) {
  const auto ids = device_ids(14, 3);
  const auto g = graph_of(ids, path_edges(14));
  EXPECT_EQ(g.distance(ids[0], ids[12]), NetworkDistance::hops(12));
  EXPECT_TRUE(g.distance(ids[0], ids[13]).is_beyond());
  EXPECT_GT(NetworkDistance::beyond(), NetworkDistance::hops(12));
}

TEST(Distance, CapIsConfigurable) {
  const auto ids = device_ids(6, 3);
  const auto g = graph_of(ids, path_edges(6), 3);
  EXPECT_EQ(g.distance(ids[0], ids[3]), NetworkDistance::hops(3));
  EXPECT_TRUE(g.distance(ids[0], ids[4]).is_beyond());
  EXPECT_EQ(g.user_count_histogram(ids[0]).counts.size(), 3u);
}

TEST(Distance, DisconnectedIsBeyondAndUnknownThrows) {
  const auto ids = device_ids(3, 3);
  const auto g = graph_of({ids[0], ids[1]}, {});
  EXPECT_TRUE(g.distance(ids[0], ids[1]).is_beyond());
  EXPECT_THROW(g.distance(ids[0], ids[2]), UnknownDevice);
  EXPECT_THROW(g.user_count_histogram(ids[2]), UnknownDevice);
}

TEST(Distance, MatchesFloydWarshall) {
  const auto check = bfs_oracle_equivalence(40, 120, 99);
  EXPECT_TRUE(check.pass) << check.detail;
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rg = gnp(40, 0.06, rng);
    const auto ids = device_ids(40, rng());
    const auto g = graph_of(ids, rg.edges);
    for (int k = 0; k < 400; ++k) {
      const auto& u = ids[rng() % 40];
      const auto& v = ids[rng() % 40];
      const auto& w = ids[rng() % 40];
      const auto uv = g.distance(u, v);
      const auto vw = g.distance(v, w);
      if (uv.is_beyond() || vw.is_beyond() || uv.value() + vw.value() > 12) continue;
      const auto uw = g.distance(u, w);
      ASSERT_FALSE(uw.is_beyond());
      ASSERT_LE(uw.value(), uv.value() + vw.value());
    }
  }
}

TEST(Distance, RemovingANodeNeverShortensDistances) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint32_t n = 30;
    const auto rg = gnp(n, 0.1, rng);
    const auto ids = device_ids(n, rng());
    const auto full = graph_of(ids, rg.edges);
    const auto removed = static_cast<std::uint32_t>(rng() % n);
    EdgeList kept;
    for (auto e : rg.edges) {
      if (e.first != removed && e.second != removed) kept.push_back(e);
    }
    const auto smaller = graph_of(ids, kept);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = 0; j < n; ++j) {
        if (i == removed || j == removed) continue;
        ASSERT_GE(smaller.distance(ids[i], ids[j]), full.distance(ids[i], ids[j]));
      }
    }
  }
}

TEST(MultiSource, StarCentreReachesLeavesAtOne) {
  const auto ids = device_ids(6, 6);
  const auto g = graph_of(ids, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
  const auto d = g.multi_source_distances(std::vector{ids[0]});
  EXPECT_EQ(d.size(), 6u);
  EXPECT_EQ(d.at(ids[0]), 0);
  for (int k = 1; k < 6; ++k) EXPECT_EQ(d.at(ids[k]), 1);
}

TEST(MultiSource, OppositeEndsOfAPath) {
  const auto ids = device_ids(7, 6);
  const auto g = graph_of(ids, path_edges(7));
  const auto d = g.multi_source_distances(std::vector{ids[0], ids[6]});
  const auto fw = floyd_warshall(7, path_edges(7));
  for (int k = 0; k < 7; ++k) EXPECT_EQ(d.at(ids[k]), std::min(fw[0][k], fw[6][k]));
  EXPECT_EQ(d.at(ids[3]), 3);
}

TEST(MultiSource, AllSourcesAreAtZeroAndUnknownSourcesAreIgnored) {
  auto ids = device_ids(5, 6);
  const auto g = graph_of(ids, path_edges(5));
  auto sources = ids;
  sources.push_back(device_ids(1, 77).front());
  const auto d = g.multi_source_distances(sources);
  ASSERT_EQ(d.size(), 5u);
  for (const auto& id : ids) EXPECT_EQ(d.at(id), 0);
}

TEST(Histogram, IsolatedViewerSeesNothing) {
  const auto ids = device_ids(3, 8);
  const auto g = graph_of(ids, {{1, 2}});
  const auto h = g.user_count_histogram(ids[0]);
  ASSERT_EQ(h.counts.size(), 12u);
  EXPECT_EQ(h.total(), 0u);
}

TEST(Histogram, CompleteGraphOnFive) {
  const auto ids = device_ids(5, 8);
  EdgeList e;
  for (std::uint32_t i = 0; i < 5; ++i) {
    for (std::uint32_t j = i + 1; j < 5; ++j) e.emplace_back(i, j);
  }
  const auto h = graph_of(ids, e).user_count_histogram(ids[2]);
  EXPECT_EQ(h.at(1), 4u);
  EXPECT_EQ(h.total(), 4u);
}

TEST(Histogram, TwoContactsIntoALargeClusterGrowThenDecay) {
  std::mt19937_64 rng(10);
  const std::uint32_t n = 2000;
  auto rg = gnp(n, 3.0 / n, rng);
  // Viewer n with exactly two links into the cluster.
  const auto oracle_ids = device_ids(n + 1, 10);
  rg.edges.emplace_back(0, n);
  rg.edges.emplace_back(1, n);
  const auto g = graph_of(oracle_ids, rg.edges);
  const auto h = g.user_count_histogram(oracle_ids[n]);
  EXPECT_EQ(h.at(1), 2u);
  std::size_t peak = 0;
  for (std::size_t d = 1; d < h.counts.size(); ++d) {
    if (h.counts[d] > h.counts[peak]) peak = d;
  }
  EXPECT_GT(peak, 1u);
  EXPECT_GT(h.counts[peak], 10 * h.counts[0]);
  EXPECT_LT(h.counts.back(), h.counts[peak]);

  // Histogram equals a count over Floyd-Warshall distances of a smaller instance.
  const auto small = gnp(150, 0.02, rng);
  const auto ids = device_ids(150, 11);
  const auto sg = graph_of(ids, small.edges);
  const auto fw = floyd_warshall(150, small.edges);
  for (std::uint32_t v = 0; v < 150; v += 7) {
    std::vector<std::uint64_t> expected(12, 0);
    for (std::uint32_t u = 0; u < 150; ++u) {
      if (fw[v][u] >= 1 && fw[v][u] <= 12) ++expected[fw[v][u] - 1];
    }
    ASSERT_EQ(sg.user_count_histogram(ids[v]).counts, expected);
  }
}

TEST(EdgeList, OneUuidPairPerLine) {
  const auto ids = device_ids(3, 12);
  const auto g = graph_of(ids, {{0, 1}, {1, 2}});
  std::ostringstream out;
  g.write_edge_list(out);
  std::istringstream in(out.str());
  std::string a, b;
  int lines = 0;
  while (in >> a >> b) {
    ++lines;
    ASSERT_TRUE(DeviceId::parse(a));
    ASSERT_TRUE(DeviceId::parse(b));
    EXPECT_LT(*DeviceId::parse(a), *DeviceId::parse(b));
  }
  EXPECT_EQ(lines, 2);
  const auto text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
