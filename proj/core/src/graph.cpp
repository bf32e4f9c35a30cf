#include "netdist/graph.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace netdist {

std::uint64_t DistanceHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ContactGraph ContactGraph::build(std::vector<DeviceId> nodes, std::vector<ContactEdge> edges, Timestamp as_of,
                                 std::uint64_t generation, int d_max) {
  if (d_max < 1 || d_max >= ContactGraph::kUnreached) {
    throw std::invalid_argument("d_max out of range");
  }
  ContactGraph g;
  g.as_of_ = as_of;
  g.generation_ = generation;
  g.d_max_ = d_max;

  for (auto& e : edges) {
    if (e.b < e.a) std::swap(e.a, e.b);
    nodes.push_back(e.a);
    nodes.push_back(e.b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.nodes_ = std::move(nodes);

  std::erase_if(edges, [](const ContactEdge& e) { return e.a == e.b; });
  std::sort(edges.begin(), edges.end(), [](const ContactEdge& x, const ContactEdge& y) {
    return std::tie(x.a, x.b, y.last_qualified_at) < std::tie(y.a, y.b, x.last_qualified_at);
  });
  // Keep the latest qualification of each pair.
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const ContactEdge& x, const ContactEdge& y) { return x.a == y.a && x.b == y.b; }),
              edges.end());

  const std::size_t n = g.nodes_.size();
  std::vector<std::pair<Index, Index>> arcs;
  arcs.reserve(2 * edges.size());
  for (const auto& e : edges) {
    const auto a = static_cast<Index>(*g.index_of(e.a));
    const auto b = static_cast<Index>(*g.index_of(e.b));
    arcs.emplace_back(a, b);
    arcs.emplace_back(b, a);
  }
  std::sort(arcs.begin(), arcs.end());
  g.offsets_.assign(n + 1, 0);
  g.adjacency_.reserve(arcs.size());
  for (const auto& [from, to] : arcs) {
    ++g.offsets_[from + 1];
    g.adjacency_.push_back(to);
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.edges_ = std::move(edges);
  return g;
}

std::optional<ContactGraph::Index> ContactGraph::index_of(const DeviceId& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<Index>(it - nodes_.begin());
}

std::vector<std::uint8_t> ContactGraph::bfs_levels(std::span<const Index> sources) const {
  std::vector<std::uint8_t> level(nodes_.size(), kUnreached);
  std::vector<Index> frontier;
  std::vector<Index> next;
  for (Index s : sources) {
    if (level[s] != 0) {
      level[s] = 0;
      frontier.push_back(s);
    }
  }
  for (int depth = 1; depth <= d_max_ && !frontier.empty(); ++depth) {
    next.clear();
    for (Index u : frontier) {
      for (Index v : neighbors(u)) {
        if (level[v] == kUnreached) {
          level[v] = static_cast<std::uint8_t>(depth);
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  return level;
}

NetworkDistance ContactGraph::distance(const DeviceId& from, const DeviceId& to) const {
  const auto s = index_of(from);
  if (!s) throw UnknownDevice(from);
  const auto t = index_of(to);
  if (!t) throw UnknownDevice(to);
  if (*s == *t) return NetworkDistance::hops(0);

  // Single-pair query: stop as soon as the target is labelled.
  std::vector<std::uint8_t> seen(nodes_.size(), 0);
  std::vector<Index> frontier{*s};
  std::vector<Index> next;
  seen[*s] = 1;
  for (int depth = 1; depth <= d_max_ && !frontier.empty(); ++depth) {
    next.clear();
    for (Index u : frontier) {
      for (Index v : neighbors(u)) {
        if (v == *t) return NetworkDistance::hops(depth);
        if (!seen[v]) {
          seen[v] = 1;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  return NetworkDistance::beyond();
}

std::unordered_map<DeviceId, int> ContactGraph::multi_source_distances(std::span<const DeviceId> sources) const {
  std::vector<Index> idx;
  for (const auto& s : sources) {
    if (auto i = index_of(s)) idx.push_back(*i);
  }
  const auto level = bfs_levels(idx);
  std::unordered_map<DeviceId, int> out;
  for (std::size_t i = 0; i < level.size(); ++i) {
    if (level[i] != kUnreached) out.emplace(nodes_[i], level[i]);
  }
  return out;
}

DistanceHistogram ContactGraph::user_count_histogram(const DeviceId& viewer) const {
  const auto v = index_of(viewer);
  if (!v) throw UnknownDevice(viewer);
  const Index src[] = {*v};
  const auto level = bfs_levels(src);
  DistanceHistogram h{std::vector<std::uint64_t>(static_cast<std::size_t>(d_max_), 0)};
  for (auto l : level) {
    if (l != kUnreached && l >= 1) ++h.counts[l - 1];
  }
  return h;
}

void ContactGraph::write_edge_list(std::ostream& out) const {
  for (const auto& e : edges_) {
    out << e.a.to_string() << ' ' << e.b.to_string() << '\n';
  }
}

ContactGraph snapshot(const LogSnapshot& log, std::vector<DeviceId> nodes, Timestamp as_of,
                      const IngestConfig& ingest, const GraphConfig& graph, std::uint64_t generation) {
  const Window window{as_of - ingest.window(), as_of};
  const auto intervals = build_intervals(log, window, ingest);
  auto edges = derive_edges(intervals, window, ingest);
  return ContactGraph::build(std::move(nodes), std::move(edges), as_of, generation, graph.d_max);
}

}  // namespace netdist
