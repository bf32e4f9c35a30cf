#include "netdist/server.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace netdist {

using nlohmann::json;
namespace fs = std::filesystem;

StateFiles StateFiles::in(const fs::path& dir) {
  return {dir / "devices.ndjson", dir / "events.ndjson", dir / "reports.ndjson", dir / "tokens.json"};
}

namespace {

/// O_APPEND file; every line is handed to the kernel before append() returns.
class AppendFile {
 public:
  AppendFile(const fs::path& path, bool sync) : path_(path), sync_(sync) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
    }
  }
  ~AppendFile() {
    if (fd_ >= 0) ::close(fd_);
  }
  AppendFile(const AppendFile&) = delete;
  AppendFile& operator=(const AppendFile&) = delete;

  void append(std::string_view line) {
    std::string buf(line);
    buf.push_back('\n');
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      const ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error("write to " + path_.string() + " failed: " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (sync_) ::fdatasync(fd_);
  }

 private:
  fs::path path_;
  bool sync_;
  int fd_ = -1;
};

/// Complete lines of `path`. A trailing fragment without newline was never
/// acknowledged; with `repair` it is cut off the file, otherwise skipped.
std::vector<std::string> read_committed_lines(const fs::path& path, bool repair) {
  std::vector<std::string> lines;
  if (!fs::exists(path)) return lines;
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  std::size_t begin = 0;
  while (begin < content.size()) {
    const std::size_t nl = content.find('\n', begin);
    if (nl == std::string::npos) {
      if (repair) fs::resize_file(path, begin);
      break;
    }
    lines.push_back(content.substr(begin, nl - begin));
    begin = nl + 1;
  }
  return lines;
}

void write_atomically(const fs::path& path, const std::string& content, bool sync) {
  const fs::path tmp = path.string() + ".tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw std::runtime_error("cannot open " + tmp.string());
    const ssize_t n = ::write(fd, content.data(), content.size());
    if (sync) ::fdatasync(fd);
    ::close(fd);
    if (n != static_cast<ssize_t>(content.size())) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

json parse_line(const fs::path& file, std::size_t line_no, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ReplayError(file, line_no, e.what());
  }
}

}  // namespace

struct SignalServer::Persistence {
  StateFiles files;
  bool sync;
  AppendFile devices;
  AppendFile events;
  AppendFile reports;
  std::mutex tokens_mutex;

  Persistence(const fs::path& dir, bool sync_writes)
      : files(StateFiles::in(dir)),
        sync(sync_writes),
        devices(files.devices, sync_writes),
        events(files.events, sync_writes),
        reports(files.reports, sync_writes) {}
};

void load_event_log(const fs::path& path, EventLog& log) {
  if (!fs::exists(path)) {
    throw ReplayError(path, 0, "no such file");
  }
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      log.append(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ReplayError(path, line_no, e.what());
    }
  }
}

SignalServer::SignalServer(ServiceConfig config, std::shared_ptr<Entropy> entropy)
    : config_(std::move(config)),
      entropy_(std::move(entropy)),
      tokens_(config_.tokens, entropy_),
      charts_(config_.chart, config_.graph.d_max) {
  validate(config_);
}

SignalServer::~SignalServer() = default;

std::unique_ptr<SignalServer> SignalServer::open(ServiceConfig config, std::shared_ptr<Entropy> entropy) {
  const fs::path dir = config.server.state_dir;
  fs::create_directories(dir);
  auto server = std::make_unique<SignalServer>(std::move(config), std::move(entropy));
  const auto files = StateFiles::in(dir);
  server->replay_from(files, true);
  server->persistence_ = std::make_unique<Persistence>(dir, server->config_.server.fsync);
  server->log_.set_commit_sink([p = server->persistence_.get()](std::string_view line) { p->events.append(line); });
  return server;
}

std::unique_ptr<SignalServer> SignalServer::replay(ServiceConfig config, std::shared_ptr<Entropy> entropy) {
  const auto files = StateFiles::in(config.server.state_dir);
  auto server = std::make_unique<SignalServer>(std::move(config), std::move(entropy));
  server->replay_from(files, false);
  return server;
}

void SignalServer::replay_from(const StateFiles& files, bool repair) {
  {
    const auto lines = read_committed_lines(files.devices, repair);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const json j = parse_line(files.devices, i + 1, lines[i]);
      auto id = DeviceId::parse(j.value("device", ""));
      if (!id) throw ReplayError(files.devices, i + 1, "bad device id");
      registry_.add(*id, j.value("community", ""));
    }
  }
  {
    const auto lines = read_committed_lines(files.events, repair);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        log_.append(record_from_json(parse_line(files.events, i + 1, lines[i])));
      } catch (const MalformedRecord& e) {
        throw ReplayError(files.events, i + 1, e.what());
      }
    }
  }
  if (fs::exists(files.tokens)) {
    std::ifstream in(files.tokens);
    try {
      const json j = json::parse(in);
      for (const auto& t : j) tokens_.restore(token_from_json(t));
    } catch (const std::exception& e) {
      throw ReplayError(files.tokens, 1, e.what());
    }
  }
  {
    const auto lines = read_committed_lines(files.reports, repair);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const json j = parse_line(files.reports, i + 1, lines[i]);
      ReportEntry entry;
      try {
        entry.report = report_from_json(j);
        entry.log_position = j.at("log_position").get<std::size_t>();
      } catch (const std::exception& e) {
        throw ReplayError(files.reports, i + 1, e.what());
      }
      const auto graph = graph_for(entry.report.reported_at, entry.log_position);
      charts_.add_case(entry.report, *graph);
      reports_.push_back(std::move(entry));
    }
  }
}

DeviceId SignalServer::register_device(std::string community) {
  const DeviceId id = registry_.register_device(*entropy_, community);
  if (persistence_) {
    persistence_->devices.append(json{{"device", id.to_string()}, {"community", community}}.dump());
  }
  return id;
}

IngestResult SignalServer::ingest_detection(const DetectionRecord& rec, Timestamp now) {
  ProximityIngest ingest(config_.ingest, registry_, log_);
  return ingest.ingest(rec, now);
}

void SignalServer::persist_tokens() {
  if (!persistence_) return;
  std::lock_guard lock(persistence_->tokens_mutex);
  json arr = json::array();
  for (const auto& t : tokens_.all()) arr.push_back(to_json(t));
  write_atomically(persistence_->files.tokens, arr.dump() + "\n", persistence_->sync);
}

std::vector<CaseToken> SignalServer::issue_tokens(std::string_view authority, std::string_view secret,
                                                  CaseKind kind, int count, Timestamp now) {
  auto issued = tokens_.issue(authority, secret, kind, count, now);
  persist_tokens();
  return issued;
}

std::vector<CaseToken> SignalServer::issue_tokens_by_secret(std::string_view secret, CaseKind kind, int count,
                                                            Timestamp now) {
  for (const auto& a : config_.tokens.authorities) {
    if (a.secret == secret) return issue_tokens(a.id, secret, kind, count, now);
  }
  throw UnauthorizedAuthority("no authority matches the presented secret");
}

std::variant<CaseReport, RedeemError> SignalServer::redeem(std::string_view token, const DeviceId& device,
                                                           std::optional<Date> symptom_start, Timestamp now) {
  const auto community = registry_.community_of(device);
  if (!community) return RedeemError::kUnknownDevice;
  auto grant = tokens_.consume(token, *community, now);
  if (auto* err = std::get_if<RedeemError>(&grant)) return *err;
  persist_tokens();
  const auto kind = std::get<TokenStore::Grant>(grant).kind;
  return commit_report(make_report(*entropy_, device, kind, symptom_start, now));
}

std::variant<CaseReport, RedeemError> SignalServer::self_report(const DeviceId& device, Date symptom_start,
                                                                Timestamp now) {
  if (!config_.tokens.allow_unauthenticated_reports) return RedeemError::kUnauthenticatedDisabled;
  if (!registry_.contains(device)) return RedeemError::kUnknownDevice;
  return commit_report(make_report(*entropy_, device, CaseKind::kPositive, symptom_start, now));
}

CaseReport SignalServer::commit_report(CaseReport report) {
  std::lock_guard lock(report_mutex_);
  const std::size_t position = log_.size();
  const auto graph = graph_for(report.reported_at, position);
  if (persistence_) {
    json j = to_json(report);
    j["log_position"] = position;
    persistence_->reports.append(j.dump());
  }
  charts_.add_case(report, *graph);
  reports_.push_back({report, position});
  return report;
}

std::shared_ptr<const ContactGraph> SignalServer::graph_for(Timestamp as_of, std::size_t log_position) {
  std::lock_guard lock(graph_mutex_);
  if (cached_graph_ && cached_graph_->as_of() == as_of && cached_position_ == log_position) {
    return cached_graph_;
  }
  ++generation_;
  cached_graph_ = std::make_shared<const ContactGraph>(
      snapshot(log_.snapshot(log_position), registry_.all(), as_of, config_.ingest, config_.graph, generation_));
  cached_position_ = log_position;
  return cached_graph_;
}

std::shared_ptr<const ContactGraph> SignalServer::graph_at(Timestamp as_of) { return graph_for(as_of, log_.size()); }

CaseChart SignalServer::chart(const DeviceId& device, Timestamp now) const {
  if (!registry_.contains(device)) throw UnknownDevice(device);
  return charts_.render_chart(device, now);
}

DistanceHistogram SignalServer::network_chart(const DeviceId& device, Timestamp now) {
  if (!registry_.contains(device)) throw UnknownDevice(device);
  const auto graph = graph_at(now);
  if (!graph->index_of(device)) {
    return DistanceHistogram{std::vector<std::uint64_t>(static_cast<std::size_t>(config_.graph.d_max), 0)};
  }
  return graph->user_count_histogram(device);
}

void SignalServer::announce_single_use(const SingleUseId& id, const DeviceId& device, Timestamp now) {
  if (!registry_.contains(device)) throw UnknownDevice(device);
  single_use_.announce(id, device, now);
}

LinkResult SignalServer::ingest_wifi_pairs(std::span<const SingleUsePair> pairs, Timestamp now) {
  auto linked = link_pairs(pairs, single_use_);
  for (const auto& obs : linked.observations) {
    const auto [ra, rb] = observation_records(obs);
    ingest_detection(ra, now);
    ingest_detection(rb, now);
  }
  for (const auto& p : pairs) {
    single_use_.forget(p.first);
    single_use_.forget(p.second);
  }
  // Announcements unmatched for a full window can never link.
  single_use_.expire_before(now - config_.ingest.window());
  std::lock_guard lock(report_mutex_);
  dropped_pairs_ += linked.dropped;
  return linked;
}

std::size_t SignalServer::dropped_single_use_pairs() const {
  std::lock_guard lock(report_mutex_);
  return dropped_pairs_;
}

Health SignalServer::health() const {
  Health h;
  {
    std::lock_guard lock(graph_mutex_);
    h.generation = generation_;
  }
  h.devices = registry_.size();
  h.events = log_.size();
  std::lock_guard lock(report_mutex_);
  h.reports = reports_.size();
  return h;
}

std::vector<CaseReport> SignalServer::reports() const {
  std::lock_guard lock(report_mutex_);
  std::vector<CaseReport> out;
  out.reserve(reports_.size());
  for (const auto& e : reports_) out.push_back(e.report);
  return out;
}

}  // namespace netdist
