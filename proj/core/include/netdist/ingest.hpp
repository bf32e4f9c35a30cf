#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/entropy.hpp"
#include "netdist/time.hpp"

namespace netdist {

enum class Channel : std::uint8_t { kBle, kUltrasound, kWifi };

std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view text);

/// One timestamped sensor observation uploaded by a device.
///
/// BLE and ultrasound records carry the temporary identifier the reporter
/// broadcast (`own_temp_id`) and the one it received (`peer_temp_id`); the
/// server joins the two sides of an encounter through them. Wi-Fi records
/// carry only the matcher-issued `wifi_temp_id`.
struct DetectionRecord {
  DeviceId reporter;
  Channel channel = Channel::kBle;
  std::string own_temp_id;
  std::string peer_temp_id;
  Timestamp timestamp = 0;
  std::optional<int> rssi;
  std::optional<double> est_distance_m;
  std::optional<std::string> wifi_temp_id;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Thrown when a JSON document cannot be read as a DetectionRecord.
class MalformedRecord : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const DetectionRecord& rec);
DetectionRecord record_from_json(const nlohmann::json& j);
/// Compact JSON with sorted keys; one line of the event log.
std::string canonical_line(const DetectionRecord& rec);

/// True iff exactly the fields belonging to the record's channel are present.
bool has_valid_channel_fields(const DetectionRecord& rec);

enum class RejectReason { kUnknownReporter, kStaleTimestamp, kMalformedChannelFields };
std::string_view to_string(RejectReason reason);

struct IngestResult {
  std::optional<RejectReason> rejected;
  /// Exact resubmission of an already committed record.
  bool duplicate = false;

  bool accepted() const { return !rejected.has_value(); }
};

/// Thread-safe set of registered devices and their enrolled community.
class DeviceRegistry {
 public:
  DeviceId register_device(Entropy& entropy, std::string community = {});
  /// Returns false if the id was already present.
  bool add(const DeviceId& id, std::string community = {});
  bool contains(const DeviceId& id) const;
  std::optional<std::string> community_of(const DeviceId& id) const;
  std::size_t size() const;
  /// Sorted.
  std::vector<DeviceId> all() const;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<DeviceId, std::string> devices_;
};

/// Immutable prefix of the event log. Cheap to copy; safe to read while the
/// log keeps growing.
class LogSnapshot {
 public:
  static constexpr std::size_t kSegmentSize = 4096;
  using Segment = std::vector<DetectionRecord>;

  LogSnapshot() = default;
  LogSnapshot(std::vector<std::shared_ptr<const Segment>> segments, std::size_t size)
      : segments_(std::move(segments)), size_(size) {}

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const DetectionRecord& operator[](std::size_t i) const {
    return (*segments_[i / kSegmentSize])[i % kSegmentSize];
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < size_; ++i) fn((*this)[i]);
  }

 private:
  std::vector<std::shared_ptr<const Segment>> segments_;
  std::size_t size_ = 0;
};

/// Append-only, deduplicating sequence of accepted records. Commit order is
/// the order of successful append() calls.
class EventLog {
 public:
  /// Called under the commit lock with the canonical line of each new record,
  /// before the record becomes visible. Used to make writes durable.
  using CommitSink = std::function<void(std::string_view line)>;

  EventLog() = default;
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  void set_commit_sink(CommitSink sink);

  /// Returns false (and changes nothing) for an exact duplicate.
  bool append(const DetectionRecord& rec);
  std::size_t size() const;
  LogSnapshot snapshot() const;
  /// First `n` committed records.
  LogSnapshot snapshot(std::size_t n) const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<LogSnapshot::Segment>> segments_;
  std::size_t size_ = 0;
  std::unordered_multimap<std::uint64_t, std::size_t> by_hash_;
  CommitSink sink_;
};

/// Registry + log + validation: the ingest_detection operation.
class ProximityIngest {
 public:
  ProximityIngest(const IngestConfig& config, const DeviceRegistry& registry, EventLog& log)
      : config_(config), registry_(registry), log_(log) {}

  IngestResult ingest(const DetectionRecord& rec, Timestamp now);

 private:
  IngestConfig config_;
  const DeviceRegistry& registry_;
  EventLog& log_;
};

/// Continuous co-presence of an unordered device pair on one channel class.
/// `a < b` always.
struct CoPresenceInterval {
  DeviceId a;
  DeviceId b;
  Channel channel = Channel::kBle;
  Timestamp start = 0;
  Timestamp end = 0;
  std::optional<double> min_distance_m;

  friend bool operator==(const CoPresenceInterval&, const CoPresenceInterval&) = default;
};

/// Unordered pair that met the co-presence threshold in a window. `a < b`.
struct ContactEdge {
  DeviceId a;
  DeviceId b;
  Timestamp last_qualified_at = 0;

  friend bool operator==(const ContactEdge&, const ContactEdge&) = default;
};

/// Half-open time range [from, to).
struct Window {
  Timestamp from = 0;
  Timestamp to = 0;

  bool contains(Timestamp t) const { return t >= from && t < to; }
};

/// Joins detection records into co-presence intervals.
///
/// Proximity samples are resolved through the temporary identifiers
/// announced in the same batch, classified as near or not (ultrasound
/// distance wins over BLE RSSI at the same instant), and stitched per pair.
/// Wi-Fi samples pair up devices reporting the same temporary identifier
/// within one stitch gap of each other.
class IntervalBuilder {
 public:
  explicit IntervalBuilder(const IngestConfig& config) : config_(config) {}

  void add(const DetectionRecord& rec);
  /// Sorted by (a, b, channel, start).
  std::vector<CoPresenceInterval> finish() const;

 private:
  struct ProximitySample {
    DeviceId reporter;
    std::string peer_temp_id;
    Timestamp t;
    Channel channel;
    std::optional<int> rssi;
    std::optional<double> distance;
  };
  struct WifiSample {
    DeviceId device;
    Timestamp t;
  };

  IngestConfig config_;
  std::unordered_map<std::string, DeviceId> temp_owner_;
  std::vector<ProximitySample> proximity_;
  std::unordered_map<std::string, std::vector<WifiSample>> wifi_;
};

std::vector<CoPresenceInterval> build_intervals(const LogSnapshot& log, Window window,
                                                const IngestConfig& config);

/// Accumulates clipped co-presence per pair and channel class and emits the
/// pairs meeting either threshold. Requires `window.to - window.from` to equal
/// the configured window length. Sorted by (a, b).
std::vector<ContactEdge> derive_edges(std::span<const CoPresenceInterval> intervals, Window window,
                                      const IngestConfig& config);

}  // namespace netdist
