#include "netdist/chart.hpp"

#include <mutex>
#include <ostream>
#include <stdexcept>

namespace netdist {

nlohmann::json to_json(const CaseChart& chart) {
  return nlohmann::json{
      {"positive", chart.positive}, {"contact", chart.contact}, {"as_of", format_timestamp(chart.as_of)}};
}

ChartEngine::ChartEngine(const ChartConfig& config, int d_max) : config_(config), d_max_(d_max) {}

Timestamp ChartEngine::visible_until(const CaseReport& report) const {
  if (report.kind == CaseKind::kPositive && report.symptom_start) {
    return start_of(*report.symptom_start) + config_.fade();
  }
  return report.reported_at + config_.fade();
}

std::vector<PinnedSignal> ChartEngine::pin_case(const CaseReport& report, const ContactGraph& graph) const {
  std::vector<PinnedSignal> out;
  const auto src = graph.index_of(report.device);
  if (!src) return out;
  const ContactGraph::Index sources[] = {*src};
  const auto level = graph.bfs_levels(sources);
  const Timestamp until = visible_until(report);
  for (std::size_t i = 0; i < level.size(); ++i) {
    const int d = level[i];
    if (d == ContactGraph::kUnreached || d == 0 || d > d_max_) continue;
    out.push_back({report.case_id, graph.device(static_cast<ContactGraph::Index>(i)), d, report.kind,
                   report.reported_at, until});
  }
  return out;
}

bool ChartEngine::add_case(const CaseReport& report, const ContactGraph& graph) {
  // Fan-out is computed outside the lock and published in one step, so
  // readers see either none or all of a case's signals.
  auto signals = pin_case(report, graph);
  std::unique_lock lock(mutex_);
  auto& active = by_reporter_[report.device];
  for (const auto& c : active) {
    if (c.kind == report.kind && c.visible_until > report.reported_at) {
      return false;
    }
  }
  active.push_back({report.kind, visible_until(report)});
  const auto index = static_cast<std::uint32_t>(case_ids_.size());
  case_ids_.push_back(report.case_id);
  for (const auto& s : signals) {
    by_viewer_[s.viewer].push_back(
        {index, static_cast<std::uint8_t>(s.distance), s.kind, s.pinned_at, s.visible_until});
  }
  signal_count_ += signals.size();
  return true;
}

CaseChart ChartEngine::render_chart(const DeviceId& viewer, Timestamp now) const {
  CaseChart chart{std::vector<int>(static_cast<std::size_t>(d_max_), 0),
                  std::vector<int>(static_cast<std::size_t>(d_max_), 0), now};
  std::shared_lock lock(mutex_);
  auto it = by_viewer_.find(viewer);
  if (it == by_viewer_.end()) return chart;
  for (const auto& s : it->second) {
    if (now < s.pinned_at || s.visible_until <= now) continue;
    auto& row = s.kind == CaseKind::kPositive ? chart.positive : chart.contact;
    ++row[s.distance - 1];
  }
  return chart;
}

std::vector<CaseChart> ChartEngine::export_frames(const DeviceId& viewer, Timestamp t0, Timestamp t1,
                                                  Seconds step) const {
  if (t1 < t0) throw std::invalid_argument("export_frames: t0 must not exceed t1");
  if (step <= 0) throw std::invalid_argument("export_frames: step must be positive");
  std::vector<CaseChart> frames;
  for (Timestamp t = t0; t <= t1; t += step) {
    frames.push_back(render_chart(viewer, t));
  }
  return frames;
}

std::vector<PinnedSignal> ChartEngine::signals_for(const DeviceId& viewer, std::size_t from) const {
  std::shared_lock lock(mutex_);
  std::vector<PinnedSignal> out;
  auto it = by_viewer_.find(viewer);
  if (it == by_viewer_.end()) return out;
  for (std::size_t k = from; k < it->second.size(); ++k) {
    const auto& s = it->second[k];
    out.push_back({case_ids_[s.case_index], viewer, s.distance, s.kind, s.pinned_at, s.visible_until});
  }
  return out;
}

std::size_t ChartEngine::signal_count() const {
  std::shared_lock lock(mutex_);
  return signal_count_;
}

std::size_t ChartEngine::case_count() const {
  std::shared_lock lock(mutex_);
  return case_ids_.size();
}

void write_frames_csv(std::ostream& out, const std::vector<CaseChart>& frames) {
  out << "t,d,positive,contact\n";
  for (const auto& f : frames) {
    for (std::size_t d = 0; d < f.positive.size(); ++d) {
      out << format_timestamp(f.as_of) << ',' << d + 1 << ',' << f.positive[d] << ',' << f.contact[d] << '\n';
    }
  }
}

}  // namespace netdist
