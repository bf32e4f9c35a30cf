#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "netdist/cases.hpp"
#include "netdist/chart.hpp"
#include "netdist/config.hpp"
#include "netdist/graph.hpp"
#include "netdist/ingest.hpp"
#include "netdist/wifi.hpp"

namespace netdist {

/// A persisted line that cannot be parsed. `line` is 1-based.
class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::filesystem::path file, std::size_t line, const std::string& what)
      : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

/// Files under a state directory.
struct StateFiles {
  std::filesystem::path devices;
  std::filesystem::path events;
  std::filesystem::path reports;
  std::filesystem::path tokens;

  static StateFiles in(const std::filesystem::path& dir);
};

/// Appends the records of an NDJSON event log. Throws ReplayError.
void load_event_log(const std::filesystem::path& path, EventLog& log);

struct Health {
  std::uint64_t generation = 0;
  std::size_t devices = 0;
  std::size_t events = 0;
  std::size_t reports = 0;
};

/// The central service: registration, ingestion, Wi-Fi pair linking, token
/// redemption, and chart queries over one consistent state.
///
/// Durable servers append every accepted write to the state directory before
/// returning. Case signals are pinned against the graph built from the event
/// log prefix committed at report time; the report log records that prefix
/// length so replay reproduces every chart exactly.
class SignalServer {
 public:
  /// Purely in-memory.
  SignalServer(ServiceConfig config, std::shared_ptr<Entropy> entropy);
  ~SignalServer();

  SignalServer(const SignalServer&) = delete;
  SignalServer& operator=(const SignalServer&) = delete;

  /// Replays whatever is in `config.server.state_dir`, then persists there.
  /// Throws ReplayError on malformed content.
  static std::unique_ptr<SignalServer> open(ServiceConfig config, std::shared_ptr<Entropy> entropy);
  /// Read-only: rebuilds state from the state directory without touching it.
  static std::unique_ptr<SignalServer> replay(ServiceConfig config, std::shared_ptr<Entropy> entropy);

  DeviceId register_device(std::string community = {});
  bool is_registered(const DeviceId& id) const { return registry_.contains(id); }

  IngestResult ingest_detection(const DetectionRecord& rec, Timestamp now);

  /// Throws UnauthorizedAuthority.
  std::vector<CaseToken> issue_tokens(std::string_view authority, std::string_view secret, CaseKind kind,
                                      int count, Timestamp now);
  /// Authorities are looked up by secret alone (bearer authentication).
  std::vector<CaseToken> issue_tokens_by_secret(std::string_view secret, CaseKind kind, int count, Timestamp now);

  std::variant<CaseReport, RedeemError> redeem(std::string_view token, const DeviceId& device,
                                               std::optional<Date> symptom_start, Timestamp now);
  /// Tokenless POSITIVE report; only when enabled in the token config.
  std::variant<CaseReport, RedeemError> self_report(const DeviceId& device, Date symptom_start, Timestamp now);

  /// Throws UnknownDevice.
  CaseChart chart(const DeviceId& device, Timestamp now) const;
  /// Throws UnknownDevice.
  DistanceHistogram network_chart(const DeviceId& device, Timestamp now);
  std::shared_ptr<const ContactGraph> graph_at(Timestamp as_of);

  void announce_single_use(const SingleUseId& id, const DeviceId& device, Timestamp now);
  /// Links a closed matcher round and commits the resulting Wi-Fi records.
  LinkResult ingest_wifi_pairs(std::span<const SingleUsePair> pairs, Timestamp now);
  std::size_t dropped_single_use_pairs() const;

  Health health() const;
  std::vector<CaseReport> reports() const;
  std::vector<DeviceId> devices() const { return registry_.all(); }
  const ChartEngine& charts() const { return charts_; }
  const EventLog& event_log() const { return log_; }
  const TokenStore& tokens() const { return tokens_; }
  const ServiceConfig& config() const { return config_; }

 private:
  struct Persistence;
  struct ReportEntry {
    CaseReport report;
    std::size_t log_position;
  };

  std::shared_ptr<const ContactGraph> graph_for(Timestamp as_of, std::size_t log_position);
  CaseReport commit_report(CaseReport report);
  void persist_tokens();
  void replay_from(const StateFiles& files, bool repair);

  ServiceConfig config_;
  std::shared_ptr<Entropy> entropy_;
  DeviceRegistry registry_;
  EventLog log_;
  TokenStore tokens_;
  ChartEngine charts_;
  SingleUseRegistry single_use_;
  std::unique_ptr<Persistence> persistence_;

  mutable std::mutex graph_mutex_;
  std::shared_ptr<const ContactGraph> cached_graph_;
  std::size_t cached_position_ = 0;
  std::uint64_t generation_ = 0;

  mutable std::mutex report_mutex_;
  std::vector<ReportEntry> reports_;
  std::size_t dropped_pairs_ = 0;
};

}  // namespace netdist
