#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/entropy.hpp"
#include "netdist/ingest.hpp"
#include "netdist/time.hpp"

namespace netdist {

/// Salted SHA-256 of an access point BSSID, lowercase hex. Computed on the device.
struct HashedBssid {
  std::string digest;
  friend auto operator<=>(const HashedBssid&, const HashedBssid&) = default;
};

HashedBssid hash_bssid(std::string_view bssid, std::string_view salt);

struct WifiTempId {
  std::string id;
  Timestamp issued_at = 0;
  Seconds ttl = 0;
};

/// Opaque identifier a device uses for exactly one matching round.
struct SingleUseId {
  std::string id;
  friend auto operator<=>(const SingleUseId&, const SingleUseId&) = default;
};

struct WifiSubmission {
  SingleUseId single_use;
  HashedBssid hash;
  Timestamp timestamp = 0;
};

/// Unordered; `first < second`.
struct SingleUsePair {
  SingleUseId first;
  SingleUseId second;
  friend auto operator<=>(const SingleUsePair&, const SingleUsePair&) = default;
};

class DuplicateSingleUseId : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All unordered pairs with equal hashes whose timestamps fall in the same
/// epoch. Throws DuplicateSingleUseId if an id appears twice. Sorted.
std::vector<SingleUsePair> match_round(std::span<const WifiSubmission> submissions, Seconds epoch);

/// Matching Entity: issues epoch-scoped temporary identifiers for hashed
/// BSSIDs, and buffers single-use submissions for pair reporting.
///
/// Never receives DeviceIds. Temporary identifiers are stable within one
/// aligned epoch and expunged when it ends; closed rounds are destroyed once
/// the retention period has elapsed.
class WifiMatcher {
 public:
  struct ClosedRound {
    std::uint64_t round = 0;
    std::vector<SingleUsePair> pairs;
  };

  WifiMatcher(const WifiMatcherConfig& config, std::shared_ptr<Entropy> entropy);

  WifiTempId resolve_bssid(const HashedBssid& hash, Timestamp now);

  void submit(const WifiSubmission& submission, Timestamp now);
  ClosedRound close_round(Timestamp now);
  std::uint64_t current_round() const;

  /// Drops expired temporary identifiers and retained rounds.
  void purge(Timestamp now);
  std::size_t retained_submissions(Timestamp now);
  /// Every value held in matcher storage, for audits. Purges first.
  std::vector<std::string> dump(Timestamp now);

 private:
  void purge_locked(Timestamp now);

  struct Retained {
    Timestamp closed_at;
    std::vector<WifiSubmission> submissions;
  };

  WifiMatcherConfig config_;
  std::shared_ptr<Entropy> entropy_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::int64_t, std::string>, WifiTempId> temp_ids_;
  std::uint64_t round_ = 0;
  std::vector<WifiSubmission> open_;
  std::vector<Retained> retained_;
};

/// Main-server table of single-use identifiers announced by devices.
class SingleUseRegistry {
 public:
  struct Entry {
    DeviceId device;
    Timestamp announced_at;
  };

  void announce(const SingleUseId& id, const DeviceId& device, Timestamp now);
  std::optional<Entry> lookup(const SingleUseId& id) const;
  void forget(const SingleUseId& id);
  /// Drops announcements older than `cutoff`.
  void expire_before(Timestamp cutoff);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

/// Device-level Wi-Fi co-presence reported by the matcher. `a < b`.
struct WifiObservation {
  DeviceId a;
  DeviceId b;
  Timestamp timestamp = 0;
  friend auto operator<=>(const WifiObservation&, const WifiObservation&) = default;
};

struct LinkResult {
  std::vector<WifiObservation> observations;
  std::size_t dropped = 0;
};

/// Resolves single-use pairs to devices. Pairs with an unknown id are dropped
/// and counted; pairs resolving to one device are suppressed.
LinkResult link_pairs(std::span<const SingleUsePair> pairs, const SingleUseRegistry& registry);

/// The two WIFI detection records that carry one observation into the event
/// log. They share a synthetic temporary identifier unique to the observation.
std::pair<DetectionRecord, DetectionRecord> observation_records(const WifiObservation& obs);

}  // namespace netdist
