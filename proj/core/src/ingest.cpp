#include "netdist/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace netdist {

using nlohmann::json;

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kBle:
      return "BLE";
    case Channel::kUltrasound:
      return "ULTRASOUND";
    case Channel::kWifi:
      return "WIFI";
  }
  return "?";
}

std::optional<Channel> parse_channel(std::string_view text) {
  if (text == "BLE") return Channel::kBle;
  if (text == "ULTRASOUND") return Channel::kUltrasound;
  if (text == "WIFI") return Channel::kWifi;
  return std::nullopt;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kUnknownReporter:
      return "unknown-reporter";
    case RejectReason::kStaleTimestamp:
      return "stale-timestamp";
    case RejectReason::kMalformedChannelFields:
      return "malformed-channel-fields";
  }
  return "?";
}

json to_json(const DetectionRecord& rec) {
  json j{{"reporter", rec.reporter.to_string()},
         {"channel", to_string(rec.channel)},
         {"timestamp", rec.timestamp}};
  if (!rec.own_temp_id.empty()) j["own_temp_id"] = rec.own_temp_id;
  if (!rec.peer_temp_id.empty()) j["peer_temp_id"] = rec.peer_temp_id;
  if (rec.rssi) j["rssi"] = *rec.rssi;
  if (rec.est_distance_m) j["est_distance_m"] = *rec.est_distance_m;
  if (rec.wifi_temp_id) j["wifi_temp_id"] = *rec.wifi_temp_id;
  return j;
}

DetectionRecord record_from_json(const json& j) {
  if (!j.is_object()) {
    throw MalformedRecord("detection record must be a JSON object");
  }
  DetectionRecord rec;
  try {
    auto id = DeviceId::parse(j.at("reporter").get<std::string>());
    if (!id) throw MalformedRecord("reporter is not a UUID");
    rec.reporter = *id;
    auto channel = parse_channel(j.at("channel").get<std::string>());
    if (!channel) throw MalformedRecord("unknown channel");
    rec.channel = *channel;
    // Epoch seconds in the log; ISO-8601 text is accepted from clients.
    const auto& ts = j.at("timestamp");
    rec.timestamp = ts.is_string() ? parse_timestamp(ts.get<std::string>()) : ts.get<Timestamp>();
    if (auto it = j.find("own_temp_id"); it != j.end()) rec.own_temp_id = it->get<std::string>();
    if (auto it = j.find("peer_temp_id"); it != j.end()) rec.peer_temp_id = it->get<std::string>();
    if (auto it = j.find("rssi"); it != j.end()) rec.rssi = it->get<int>();
    if (auto it = j.find("est_distance_m"); it != j.end()) rec.est_distance_m = it->get<double>();
    if (auto it = j.find("wifi_temp_id"); it != j.end()) rec.wifi_temp_id = it->get<std::string>();
  } catch (const json::exception& e) {
    throw MalformedRecord(e.what());
  } catch (const std::invalid_argument& e) {
    throw MalformedRecord(e.what());
  }
  return rec;
}

std::string canonical_line(const DetectionRecord& rec) { return to_json(rec).dump(); }

bool has_valid_channel_fields(const DetectionRecord& rec) {
  switch (rec.channel) {
    case Channel::kBle:
      return !rec.own_temp_id.empty() && !rec.peer_temp_id.empty() && !rec.est_distance_m &&
             !rec.wifi_temp_id;
    case Channel::kUltrasound:
      return !rec.own_temp_id.empty() && !rec.peer_temp_id.empty() && rec.est_distance_m &&
             std::isfinite(*rec.est_distance_m) && *rec.est_distance_m >= 0.0 && !rec.rssi &&
             !rec.wifi_temp_id;
    case Channel::kWifi:
      return rec.wifi_temp_id && !rec.wifi_temp_id->empty() && rec.own_temp_id.empty() &&
             rec.peer_temp_id.empty() && !rec.rssi && !rec.est_distance_m;
  }
  return false;
}

// ---------------------------------------------------------------------------
// DeviceRegistry

DeviceId DeviceRegistry::register_device(Entropy& entropy, std::string community) {
  std::unique_lock lock(mutex_);
  for (;;) {
    auto id = DeviceId::generate(entropy);
    if (devices_.emplace(id, community).second) {
      return id;
    }
  }
}

bool DeviceRegistry::add(const DeviceId& id, std::string community) {
  std::unique_lock lock(mutex_);
  return devices_.emplace(id, std::move(community)).second;
}

bool DeviceRegistry::contains(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  return devices_.contains(id);
}

std::optional<std::string> DeviceRegistry::community_of(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) return std::nullopt;
  return it->second;
}

std::size_t DeviceRegistry::size() const {
  std::shared_lock lock(mutex_);
  return devices_.size();
}

std::vector<DeviceId> DeviceRegistry::all() const {
  std::vector<DeviceId> out;
  {
    std::shared_lock lock(mutex_);
    out.reserve(devices_.size());
    for (const auto& [id, _] : devices_) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// EventLog

void EventLog::set_commit_sink(CommitSink sink) {
  std::lock_guard lock(mutex_);
  sink_ = std::move(sink);
}

namespace {

std::uint64_t record_hash(const DetectionRecord& rec) {
  std::uint64_t h = std::hash<DeviceId>{}(rec.reporter);
  auto mix = [&](std::uint64_t v) { h = mix64(h ^ v); };
  auto mix_str = [&](std::string_view s) { mix(std::hash<std::string_view>{}(s)); };
  mix(static_cast<std::uint64_t>(rec.channel));
  mix_str(rec.own_temp_id);
  mix_str(rec.peer_temp_id);
  mix(static_cast<std::uint64_t>(rec.timestamp));
  mix(rec.rssi ? static_cast<std::uint64_t>(*rec.rssi) * 2 + 1 : 0);
  mix(rec.est_distance_m ? std::bit_cast<std::uint64_t>(*rec.est_distance_m) : 0x7ff8dead);
  if (rec.wifi_temp_id) mix_str(*rec.wifi_temp_id);
  return h;
}

}  // namespace

bool EventLog::append(const DetectionRecord& rec) {
  const std::uint64_t h = record_hash(rec);
  std::lock_guard lock(mutex_);
  auto [lo, hi] = by_hash_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    const std::size_t i = it->second;
    if ((*segments_[i / LogSnapshot::kSegmentSize])[i % LogSnapshot::kSegmentSize] == rec) {
      return false;
    }
  }
  if (sink_) {
    sink_(canonical_line(rec));
  }
  if (size_ % LogSnapshot::kSegmentSize == 0) {
    auto seg = std::make_shared<LogSnapshot::Segment>();
    seg->reserve(LogSnapshot::kSegmentSize);
    segments_.push_back(std::move(seg));
  }
  // The segment never reallocates, so readers of earlier slots are unaffected.
  segments_.back()->push_back(rec);
  by_hash_.emplace(h, size_);
  ++size_;
  return true;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mutex_);
  return size_;
}

LogSnapshot EventLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return LogSnapshot({segments_.begin(), segments_.end()}, size_);
}

LogSnapshot EventLog::snapshot(std::size_t n) const {
  std::lock_guard lock(mutex_);
  return LogSnapshot({segments_.begin(), segments_.end()}, std::min(n, size_));
}

// ---------------------------------------------------------------------------
// ProximityIngest

IngestResult ProximityIngest::ingest(const DetectionRecord& rec, Timestamp now) {
  if (!registry_.contains(rec.reporter)) {
    return {RejectReason::kUnknownReporter};
  }
  if (!has_valid_channel_fields(rec)) {
    return {RejectReason::kMalformedChannelFields};
  }
  if (rec.timestamp < now - config_.window() || rec.timestamp > now + config_.clock_skew()) {
    return {RejectReason::kStaleTimestamp};
  }
  IngestResult result;
  result.duplicate = !log_.append(rec);
  return result;
}

// ---------------------------------------------------------------------------
// Interval construction

namespace {

using PairKey = std::pair<DeviceId, DeviceId>;

PairKey ordered(const DeviceId& x, const DeviceId& y) { return x < y ? PairKey{x, y} : PairKey{y, x}; }

struct NearSample {
  Timestamp t;
  bool ultrasound;
  std::optional<double> distance;
};

/// Merges time-sorted samples into runs whose internal gaps are at most `gap`.
template <typename Sample, typename Emit>
void stitch(const std::vector<Sample>& samples, Seconds gap, Emit&& emit) {
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i == samples.size() || samples[i].t - samples[i - 1].t > gap) {
      emit(begin, i);
      begin = i;
    }
  }
}

}  // namespace

void IntervalBuilder::add(const DetectionRecord& rec) {
  switch (rec.channel) {
    case Channel::kBle:
    case Channel::kUltrasound: {
      auto [it, inserted] = temp_owner_.emplace(rec.own_temp_id, rec.reporter);
      if (!inserted && rec.reporter < it->second) {
        it->second = rec.reporter;
      }
      proximity_.push_back(
          {rec.reporter, rec.peer_temp_id, rec.timestamp, rec.channel, rec.rssi, rec.est_distance_m});
      break;
    }
    case Channel::kWifi:
      wifi_[*rec.wifi_temp_id].push_back({rec.reporter, rec.timestamp});
      break;
  }
}

std::vector<CoPresenceInterval> IntervalBuilder::finish() const {
  std::vector<CoPresenceInterval> out;

  // Proximity: resolve peers, then decide nearness per (pair, instant).
  struct Resolved {
    PairKey pair;
    Timestamp t;
    Channel channel;
    std::optional<int> rssi;
    std::optional<double> distance;
  };
  std::vector<Resolved> resolved;
  resolved.reserve(proximity_.size());
  for (const auto& s : proximity_) {
    auto it = temp_owner_.find(s.peer_temp_id);
    if (it == temp_owner_.end() || it->second == s.reporter) continue;
    resolved.push_back({ordered(s.reporter, it->second), s.t, s.channel, s.rssi, s.distance});
  }
  std::sort(resolved.begin(), resolved.end(), [](const Resolved& x, const Resolved& y) {
    return std::tie(x.pair, x.t) < std::tie(y.pair, y.t);
  });

  std::vector<NearSample> near;
  auto flush_pair = [&](const PairKey& pair) {
    stitch(near, config_.stitch_gap(), [&](std::size_t b, std::size_t e) {
      CoPresenceInterval iv{pair.first, pair.second, Channel::kBle, near[b].t, near[e - 1].t, std::nullopt};
      for (std::size_t k = b; k < e; ++k) {
        if (near[k].ultrasound) {
          iv.channel = Channel::kUltrasound;
          iv.min_distance_m = std::min(iv.min_distance_m.value_or(*near[k].distance), *near[k].distance);
        }
      }
      out.push_back(iv);
    });
    near.clear();
  };

  for (std::size_t i = 0; i < resolved.size();) {
    std::size_t j = i;
    bool any_ultrasound = false;
    while (j < resolved.size() && resolved[j].pair == resolved[i].pair && resolved[j].t == resolved[i].t) {
      any_ultrasound |= resolved[j].channel == Channel::kUltrasound;
      ++j;
    }
    if (any_ultrasound) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t k = i; k < j; ++k) {
        if (resolved[k].channel == Channel::kUltrasound) d = std::min(d, *resolved[k].distance);
      }
      if (d <= config_.near_distance_m) near.push_back({resolved[i].t, true, d});
    } else {
      bool strong = false;
      for (std::size_t k = i; k < j; ++k) {
        strong |= resolved[k].rssi && *resolved[k].rssi >= config_.rssi_cutoff_db;
      }
      if (strong) near.push_back({resolved[i].t, false, std::nullopt});
    }
    if (j == resolved.size() || resolved[j].pair != resolved[i].pair) {
      flush_pair(resolved[i].pair);
    }
    i = j;
  }

  // Wi-Fi: two devices on one temporary id are co-present at an instant one
  // of them sampled if the other sampled within a Wi-Fi stitch gap of it.
  struct PairInstant {
    PairKey pair;
    Timestamp t;
  };
  std::vector<PairInstant> instants;
  const Seconds gap = config_.wifi_stitch_gap();
  for (const auto& [temp_id, samples] : wifi_) {
    std::map<DeviceId, std::vector<Timestamp>> by_device;
    for (const auto& s : samples) by_device[s.device].push_back(s.t);
    for (auto& [_, ts] : by_device) {
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }
    for (auto x = by_device.begin(); x != by_device.end(); ++x) {
      for (auto y = std::next(x); y != by_device.end(); ++y) {
        auto witness = [&](const std::vector<Timestamp>& mine, const std::vector<Timestamp>& theirs) {
          for (Timestamp t : mine) {
            auto it = std::lower_bound(theirs.begin(), theirs.end(), t - gap);
            if (it != theirs.end() && *it <= t + gap) instants.push_back({{x->first, y->first}, t});
          }
        };
        witness(x->second, y->second);
        witness(y->second, x->second);
      }
    }
  }
  std::sort(instants.begin(), instants.end(), [](const PairInstant& p, const PairInstant& q) {
    return std::tie(p.pair, p.t) < std::tie(q.pair, q.t);
  });
  instants.erase(std::unique(instants.begin(), instants.end(),
                             [](const PairInstant& p, const PairInstant& q) {
                               return p.pair == q.pair && p.t == q.t;
                             }),
                 instants.end());
  for (std::size_t i = 0; i < instants.size();) {
    std::size_t j = i;
    while (j < instants.size() && instants[j].pair == instants[i].pair) ++j;
    std::vector<PairInstant> run(instants.begin() + static_cast<std::ptrdiff_t>(i),
                                 instants.begin() + static_cast<std::ptrdiff_t>(j));
    stitch(run, gap, [&](std::size_t b, std::size_t e) {
      out.push_back({run[b].pair.first, run[b].pair.second, Channel::kWifi, run[b].t, run[e - 1].t, std::nullopt});
    });
    i = j;
  }

  std::sort(out.begin(), out.end(), [](const CoPresenceInterval& x, const CoPresenceInterval& y) {
    return std::tie(x.a, x.b, x.channel, x.start, x.end) < std::tie(y.a, y.b, y.channel, y.start, y.end);
  });
  return out;
}

std::vector<CoPresenceInterval> build_intervals(const LogSnapshot& log, Window window,
                                                const IngestConfig& config) {
  IntervalBuilder builder(config);
  log.for_each([&](const DetectionRecord& rec) {
    if (window.contains(rec.timestamp)) builder.add(rec);
  });
  return builder.finish();
}

// ---------------------------------------------------------------------------
// Edge derivation

std::vector<ContactEdge> derive_edges(std::span<const CoPresenceInterval> intervals, Window window,
                                      const IngestConfig& config) {
  if (window.to - window.from != config.window()) {
    throw std::invalid_argument("derive_edges: window length must equal the configured window");
  }
  struct Segment {
    Timestamp start;
    Timestamp end;
  };
  struct Accum {
    std::vector<Segment> proximity;
    std::vector<Segment> wifi;
    Timestamp last = 0;
  };
  std::map<PairKey, Accum> pairs;
  for (const auto& iv : intervals) {
    if (iv.a == iv.b) continue;
    const Timestamp s = std::max(iv.start, window.from);
    const Timestamp e = std::min(iv.end, window.to);
    if (s > e || s >= window.to) continue;
    auto& acc = pairs[ordered(iv.a, iv.b)];
    if (iv.channel == Channel::kWifi) {
      acc.wifi.push_back({s, e});
    } else if (!iv.min_distance_m || *iv.min_distance_m <= config.near_distance_m) {
      acc.proximity.push_back({s, e});
    }
  }

  // Union length of closed segments, plus the end of the latest one.
  auto covered = [](std::vector<Segment>& segs) {
    std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.start < y.start; });
    Seconds total = 0;
    Timestamp cur_s = 0;
    Timestamp cur_e = 0;
    bool open = false;
    for (const auto& sg : segs) {
      if (open && sg.start <= cur_e) {
        cur_e = std::max(cur_e, sg.end);
        continue;
      }
      if (open) total += cur_e - cur_s;
      cur_s = sg.start;
      cur_e = sg.end;
      open = true;
    }
    if (open) total += cur_e - cur_s;
    return total;
  };
  auto latest_end = [](const std::vector<Segment>& segs) {
    Timestamp t = std::numeric_limits<Timestamp>::min();
    for (const auto& sg : segs) t = std::max(t, sg.end);
    return t;
  };

  std::vector<ContactEdge> edges;
  for (auto& [pair, acc] : pairs) {
    const bool near = covered(acc.proximity) >= config.proximity_threshold();
    const bool wifi = covered(acc.wifi) >= config.wifi_threshold();
    if (!near && !wifi) continue;
    Timestamp last = std::numeric_limits<Timestamp>::min();
    if (near) last = std::max(last, latest_end(acc.proximity));
    if (wifi) last = std::max(last, latest_end(acc.wifi));
    edges.push_back({pair.first, pair.second, last});
  }
  return edges;
}

}  // namespace netdist
