#include "netdist/config.hpp"

namespace netdist {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    it->get_to(out);
  }
}

}  // namespace

void from_json(const json& j, IngestConfig& c) {
  read(j, "near_distance_m", c.near_distance_m);
  read(j, "proximity_minutes", c.proximity_minutes);
  read(j, "wifi_minutes", c.wifi_minutes);
  read(j, "rssi_cutoff_db", c.rssi_cutoff_db);
  read(j, "stitch_gap_minutes", c.stitch_gap_minutes);
  read(j, "wifi_stitch_gap_minutes", c.wifi_stitch_gap_minutes);
  read(j, "window_days", c.window_days);
  read(j, "clock_skew_minutes", c.clock_skew_minutes);
}

void to_json(json& j, const IngestConfig& c) {
  j = json{{"near_distance_m", c.near_distance_m},
           {"proximity_minutes", c.proximity_minutes},
           {"wifi_minutes", c.wifi_minutes},
           {"rssi_cutoff_db", c.rssi_cutoff_db},
           {"stitch_gap_minutes", c.stitch_gap_minutes},
           {"wifi_stitch_gap_minutes", c.wifi_stitch_gap_minutes},
           {"window_days", c.window_days},
           {"clock_skew_minutes", c.clock_skew_minutes}};
}

void from_json(const json& j, WifiMatcherConfig& c) {
  if (auto it = j.find("protocol"); it != j.end()) {
    const auto name = it->get<std::string>();
    if (name == "temp_id") {
      c.protocol = WifiProtocol::kTempId;
    } else if (name == "pair_report") {
      c.protocol = WifiProtocol::kPairReport;
    } else {
      throw ConfigError("wifi_matcher.protocol must be temp_id or pair_report, got " + name);
    }
  }
  read(j, "epoch_minutes", c.epoch_minutes);
  read(j, "retention_minutes", c.retention_minutes);
  read(j, "host", c.host);
  read(j, "port", c.port);
  read(j, "secret", c.secret);
}

void to_json(json& j, const WifiMatcherConfig& c) {
  j = json{{"protocol", c.protocol == WifiProtocol::kTempId ? "temp_id" : "pair_report"},
           {"epoch_minutes", c.epoch_minutes},
           {"retention_minutes", c.retention_minutes},
           {"host", c.host},
           {"port", c.port}};
}

void from_json(const json& j, GraphConfig& c) { read(j, "d_max", c.d_max); }
void to_json(json& j, const GraphConfig& c) { j = json{{"d_max", c.d_max}}; }

void from_json(const json& j, ChartConfig& c) { read(j, "fade_days", c.fade_days); }
void to_json(json& j, const ChartConfig& c) { j = json{{"fade_days", c.fade_days}}; }

void from_json(const json& j, AuthorityConfig& c) {
  j.at("id").get_to(c.id);
  j.at("secret").get_to(c.secret);
  read(j, "community", c.community);
}

void to_json(json& j, const AuthorityConfig& c) {
  j = json{{"id", c.id}, {"community", c.community}};
}

void from_json(const json& j, TokenConfig& c) {
  read(j, "validity_hours", c.validity_hours);
  read(j, "allow_unauthenticated_reports", c.allow_unauthenticated_reports);
  read(j, "authorities", c.authorities);
}

void to_json(json& j, const TokenConfig& c) {
  j = json{{"validity_hours", c.validity_hours},
           {"allow_unauthenticated_reports", c.allow_unauthenticated_reports},
           {"authorities", c.authorities}};
}

void from_json(const json& j, ServerConfig& c) {
  read(j, "host", c.host);
  read(j, "port", c.port);
  if (auto it = j.find("state_dir"); it != j.end()) {
    c.state_dir = it->get<std::string>();
  }
  read(j, "fsync", c.fsync);
}

void to_json(json& j, const ServerConfig& c) {
  j = json{{"host", c.host}, {"port", c.port}, {"state_dir", c.state_dir.string()}, {"fsync", c.fsync}};
}

void from_json(const json& j, ServiceConfig& c) {
  read(j, "ingest", c.ingest);
  read(j, "wifi_matcher", c.wifi_matcher);
  read(j, "graph", c.graph);
  read(j, "chart", c.chart);
  read(j, "tokens", c.tokens);
  read(j, "server", c.server);
}

void to_json(json& j, const ServiceConfig& c) {
  j = json{{"ingest", c.ingest},
           {"wifi_matcher", c.wifi_matcher},
           {"graph", c.graph},
           {"chart", c.chart},
           {"tokens", c.tokens},
           {"server", c.server}};
}

void validate(const ServiceConfig& config) {
  const auto& in = config.ingest;
  if (in.near_distance_m < 0 || in.proximity_minutes <= 0 || in.wifi_minutes <= 0 || in.stitch_gap_minutes < 0 ||
      in.wifi_stitch_gap_minutes < 0 || in.window_days <= 0 || in.clock_skew_minutes < 0) {
    throw ConfigError("ingest thresholds must be positive");
  }
  const auto& wm = config.wifi_matcher;
  if (wm.epoch_minutes <= 0 || wm.epoch_minutes >= 60) {
    throw ConfigError("wifi_matcher.epoch_minutes must be in (0, 60)");
  }
  if (wm.retention_minutes < 0 || wm.retention_minutes > 240) {
    throw ConfigError("wifi_matcher.retention_minutes must be in [0, 240]");
  }
  if (config.graph.d_max < 1 || config.graph.d_max > 64) {
    throw ConfigError("graph.d_max must be in [1, 64]");
  }
  if (config.chart.fade_days <= 0) {
    throw ConfigError("chart.fade_days must be positive");
  }
  if (config.tokens.validity_hours <= 0) {
    throw ConfigError("tokens.validity_hours must be positive");
  }
  for (const auto& a : config.tokens.authorities) {
    if (a.id.empty() || a.secret.empty()) {
      throw ConfigError("authorities need a non-empty id and secret");
    }
  }
}

}  // namespace netdist
