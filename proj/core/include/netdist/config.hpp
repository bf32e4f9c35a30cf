#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/time.hpp"

namespace netdist {

/// Co-presence thresholds. JSON key `ingest`.
struct IngestConfig {
  double near_distance_m = 10.0;
  int proximity_minutes = 15;
  int wifi_minutes = 180;
  /// BLE-only detections count as "near" iff rssi >= this cutoff.
  int rssi_cutoff_db = -75;
  /// Consecutive samples of one pair merge into one interval when the gap is at most this.
  int stitch_gap_minutes = 5;
  /// Wi-Fi samples arrive at most once per matcher round when pair reporting
  /// is used, so they stitch across a longer gap: one matcher epoch.
  int wifi_stitch_gap_minutes = 20;
  int window_days = 14;
  int clock_skew_minutes = 2;

  Seconds proximity_threshold() const { return proximity_minutes * kMinute; }
  Seconds wifi_threshold() const { return wifi_minutes * kMinute; }
  Seconds stitch_gap() const { return stitch_gap_minutes * kMinute; }
  Seconds wifi_stitch_gap() const { return wifi_stitch_gap_minutes * kMinute; }
  Seconds window() const { return window_days * kDay; }
  Seconds clock_skew() const { return clock_skew_minutes * kMinute; }
};

enum class WifiProtocol { kTempId, kPairReport };

/// JSON key `wifi_matcher`.
struct WifiMatcherConfig {
  WifiProtocol protocol = WifiProtocol::kTempId;
  int epoch_minutes = 20;
  /// 0 destroys a round's submissions when it closes; at most 240.
  int retention_minutes = 0;
  std::string host = "127.0.0.1";
  int port = 0;
  /// Bearer secret shared by the main server and the matcher.
  std::string secret;

  Seconds epoch() const { return epoch_minutes * kMinute; }
  Seconds retention() const { return retention_minutes * kMinute; }
};

/// JSON key `graph`.
struct GraphConfig {
  int d_max = 12;
};

/// JSON key `chart`.
struct ChartConfig {
  int fade_days = 10;
  Seconds fade() const { return fade_days * kDay; }
};

struct AuthorityConfig {
  std::string id;
  std::string secret;
  /// Empty means the authority's tokens are not community scoped.
  std::string community;
};

/// JSON key `tokens`.
struct TokenConfig {
  int validity_hours = 72;
  bool allow_unauthenticated_reports = false;
  std::vector<AuthorityConfig> authorities;

  Seconds validity() const { return validity_hours * kHour; }
};

/// JSON key `server`.
struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path state_dir = "state";
  /// fdatasync after every append. Without it writes survive a process crash
  /// but not a power loss.
  bool fsync = true;
};

/// The service-side half of the scenario document.
struct ServiceConfig {
  IngestConfig ingest;
  WifiMatcherConfig wifi_matcher;
  GraphConfig graph;
  ChartConfig chart;
  TokenConfig tokens;
  ServerConfig server;
};

/// Thrown for documents that parse but violate a constraint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void from_json(const nlohmann::json& j, IngestConfig& c);
void to_json(nlohmann::json& j, const IngestConfig& c);
void from_json(const nlohmann::json& j, WifiMatcherConfig& c);
void to_json(nlohmann::json& j, const WifiMatcherConfig& c);
void from_json(const nlohmann::json& j, GraphConfig& c);
void to_json(nlohmann::json& j, const GraphConfig& c);
void from_json(const nlohmann::json& j, ChartConfig& c);
void to_json(nlohmann::json& j, const ChartConfig& c);
void from_json(const nlohmann::json& j, AuthorityConfig& c);
void to_json(nlohmann::json& j, const AuthorityConfig& c);
void from_json(const nlohmann::json& j, TokenConfig& c);
void to_json(nlohmann::json& j, const TokenConfig& c);
void from_json(const nlohmann::json& j, ServerConfig& c);
void to_json(nlohmann::json& j, const ServerConfig& c);
void from_json(const nlohmann::json& j, ServiceConfig& c);
void to_json(nlohmann::json& j, const ServiceConfig& c);

/// Checks ranges; throws ConfigError.
void validate(const ServiceConfig& config);

}  // namespace netdist
