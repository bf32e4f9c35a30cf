#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/ingest.hpp"
#include "netdist/time.hpp"

namespace netdist {

inline constexpr int kDefaultMaxDistance = 12;

/// Hop count in the contact graph, or BEYOND (farther than the cap or
/// disconnected). BEYOND orders after every finite distance.
class NetworkDistance {
 public:
  static constexpr NetworkDistance beyond() { return NetworkDistance(kBeyond); }
  static constexpr NetworkDistance hops(int n) { return NetworkDistance(n); }

  constexpr bool is_beyond() const { return value_ == kBeyond; }
  /// Only meaningful when finite.
  constexpr int value() const { return value_; }

  friend constexpr auto operator<=>(NetworkDistance, NetworkDistance) = default;

 private:
  static constexpr int kBeyond = std::numeric_limits<int>::max();
  constexpr explicit NetworkDistance(int v) : value_(v) {}
  int value_;
};

class UnknownDevice : public std::runtime_error {
 public:
  explicit UnknownDevice(const DeviceId& id) : std::runtime_error("unknown device " + id.to_string()) {}
};

/// counts[d - 1] = number of users at distance d, for d = 1..d_max.
struct DistanceHistogram {
  std::vector<std::uint64_t> counts;

  std::uint64_t at(int d) const { return counts.at(static_cast<std::size_t>(d - 1)); }
  std::uint64_t total() const;
};

/// Immutable snapshot of the interaction network over one window.
///
/// Nodes are stored sorted by DeviceId with CSR adjacency. Distance queries
/// run a level-synchronous BFS that stops after `d_max` levels.
class ContactGraph {
 public:
  using Index = std::uint32_t;
  /// Level value for nodes not reached within d_max hops.
  static constexpr std::uint8_t kUnreached = 0xff;

  ContactGraph() = default;

  /// Endpoints of `edges` missing from `nodes` are added. Self-loops and
  /// duplicate edges are dropped.
  static ContactGraph build(std::vector<DeviceId> nodes, std::vector<ContactEdge> edges, Timestamp as_of,
                            std::uint64_t generation = 0, int d_max = kDefaultMaxDistance);

  Timestamp as_of() const { return as_of_; }
  std::uint64_t generation() const { return generation_; }
  int d_max() const { return d_max_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<DeviceId>& nodes() const { return nodes_; }
  const std::vector<ContactEdge>& edges() const { return edges_; }

  std::optional<Index> index_of(const DeviceId& id) const;
  const DeviceId& device(Index i) const { return nodes_[i]; }
  std::span<const Index> neighbors(Index i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }

  /// Throws UnknownDevice. distance(x, x) is 0.
  NetworkDistance distance(const DeviceId& from, const DeviceId& to) const;

  /// Per-node minimum hop count to any source, kUnreached beyond d_max.
  std::vector<std::uint8_t> bfs_levels(std::span<const Index> sources) const;

  /// Devices within d_max of any source, mapped to their minimum distance.
  /// Unknown sources are ignored.
  std::unordered_map<DeviceId, int> multi_source_distances(std::span<const DeviceId> sources) const;

  /// Throws UnknownDevice.
  DistanceHistogram user_count_histogram(const DeviceId& viewer) const;

  /// One `uuid_a uuid_b` line per edge.
  void write_edge_list(std::ostream& out) const;

 private:
  Timestamp as_of_ = 0;
  std::uint64_t generation_ = 0;
  int d_max_ = kDefaultMaxDistance;
  std::vector<DeviceId> nodes_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Index> adjacency_;
  std::vector<ContactEdge> edges_;
};

/// Graph over the edges derived from `[as_of - window, as_of)` of the log.
ContactGraph snapshot(const LogSnapshot& log, std::vector<DeviceId> nodes, Timestamp as_of,
                      const IngestConfig& ingest, const GraphConfig& graph, std::uint64_t generation = 0);

}  // namespace netdist
