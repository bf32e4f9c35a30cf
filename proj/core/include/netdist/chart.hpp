#pragma once

#include <cstdint>
#include <iosfwd>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/cases.hpp"
#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/graph.hpp"
#include "netdist/time.hpp"

namespace netdist {

/// A case's +1 on one viewer's chart, fixed at the distance measured when the
/// case was reported.
struct PinnedSignal {
  std::string case_id;
  DeviceId viewer;
  int distance = 0;
  CaseKind kind = CaseKind::kPositive;
  /// The report time. Charts before it do not show the signal.
  Timestamp pinned_at = 0;
  Timestamp visible_until = 0;

  friend bool operator==(const PinnedSignal&, const PinnedSignal&) = default;
};

/// positive[d - 1] and contact[d - 1] count active signals at distance d.
struct CaseChart {
  std::vector<int> positive;
  std::vector<int> contact;
  Timestamp as_of = 0;

  friend bool operator==(const CaseChart&, const CaseChart&) = default;
};

nlohmann::json to_json(const CaseChart& chart);

class ChartEngine {
 public:
  ChartEngine(const ChartConfig& config, int d_max = kDefaultMaxDistance);

  /// symptom_start + fade for POSITIVE, reported_at + fade for CONTACT.
  Timestamp visible_until(const CaseReport& report) const;

  /// One signal per graph node within d_max of the reporting device, except
  /// the reporter itself.
  std::vector<PinnedSignal> pin_case(const CaseReport& report, const ContactGraph& graph) const;

  /// Pins and stores the case. Returns false, storing nothing, when the same
  /// device already has an active case of the same kind.
  bool add_case(const CaseReport& report, const ContactGraph& graph);

  CaseChart render_chart(const DeviceId& viewer, Timestamp now) const;

  /// Charts at t0, t0 + step, ... up to and including t1.
  std::vector<CaseChart> export_frames(const DeviceId& viewer, Timestamp t0, Timestamp t1, Seconds step) const;

  /// Stored signals of one viewer in pin order, skipping the first `from`.
  std::vector<PinnedSignal> signals_for(const DeviceId& viewer, std::size_t from = 0) const;
  std::size_t signal_count() const;
  std::size_t case_count() const;
  int d_max() const { return d_max_; }

 private:
  struct Stored {
    std::uint32_t case_index;
    std::uint8_t distance;
    CaseKind kind;
    Timestamp pinned_at;
    Timestamp visible_until;
  };
  struct ActiveCase {
    CaseKind kind;
    Timestamp visible_until;
  };

  ChartConfig config_;
  int d_max_;
  mutable std::shared_mutex mutex_;
  std::vector<std::string> case_ids_;
  std::unordered_map<DeviceId, std::vector<Stored>> by_viewer_;
  std::unordered_map<DeviceId, std::vector<ActiveCase>> by_reporter_;
  std::size_t signal_count_ = 0;
};

/// `t,d,positive,contact` with one row per frame and distance.
void write_frames_csv(std::ostream& out, const std::vector<CaseChart>& frames);

}  // namespace netdist
