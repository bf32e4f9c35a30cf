#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "netdist/config.hpp"
#include "netdist/http.hpp"
#include "netdist/server.hpp"
#include "netdist/sim/experiments.hpp"

namespace netdist::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::atomic<bool> g_shutdown{false};

void on_signal(int) { g_shutdown.store(true); }

void setup_logging() {
  auto logger = spdlog::get("netdist");
  if (!logger) {
    logger = spdlog::stderr_color_mt("netdist");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("NETDIST_LOG");
  auto level = spdlog::level::info;
  if (env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour that when asked.
    if (level == spdlog::level::off && std::string_view(env) != "off") level = spdlog::level::info;
  }
  spdlog::set_level(level);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFailure("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigFailure("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

ServiceConfig load_service_config(const fs::path& path) {
  const json j = parse_json(read_file(path), path);
  try {
    auto config = j.get<ServiceConfig>();
    validate(config);
    return config;
  } catch (const json::exception& e) {
    throw ConfigFailure("config file " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigFailure("config file " + path.string() + ": " + e.what());
  }
}

std::shared_ptr<Entropy> make_entropy(const std::optional<std::uint64_t>& seed) {
  if (seed) return std::make_shared<SeededEntropy>(*seed);
  return std::make_shared<SystemEntropy>();
}

Timestamp parse_time_flag(const std::string& text, const char* flag) {
  try {
    return parse_timestamp(text);
  } catch (const std::invalid_argument&) {
    throw ConfigFailure(std::string(flag) + " must be an ISO-8601 UTC time, got '" + text + "'");
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw EnvironmentFailure("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EnvironmentFailure("cannot write " + path.string());
  return out;
}

/// Common flags; not every command uses all of them.
struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string device;
  std::string from;
  std::string to;
  std::string step = "1d";
};

// --- serve --------------------------------------------------------------------

int cmd_serve(const Options& opt) {
  auto config = load_service_config(opt.config);
  std::unique_ptr<SignalServer> server;
  try {
    server = SignalServer::open(config, make_entropy(opt.seed));
  } catch (const fs::filesystem_error& e) {
    throw EnvironmentFailure(std::string("state directory: ") + e.what());
  }
  const auto h = server->health();
  spdlog::info("state {}: {} devices, {} events, {} reports", config.server.state_dir.string(), h.devices, h.events,
               h.reports);

  HttpFrontend api(*server);
  int port = 0;
  try {
    port = api.bind(config.server.host, config.server.port);
  } catch (const BindError& e) {
    throw EnvironmentFailure(e.what());
  }

  std::unique_ptr<WifiMatcher> matcher;
  std::unique_ptr<MatcherFrontend> matcher_api;
  std::jthread matcher_thread;
  if (config.wifi_matcher.port > 0) {
    if (config.wifi_matcher.secret.empty()) throw ConfigFailure("wifi_matcher.secret is required when port is set");
    matcher = std::make_unique<WifiMatcher>(config.wifi_matcher, make_entropy(std::nullopt));
    matcher_api = std::make_unique<MatcherFrontend>(*matcher, config.wifi_matcher.secret);
    try {
      matcher_api->bind(config.wifi_matcher.host, config.wifi_matcher.port);
    } catch (const BindError& e) {
      throw EnvironmentFailure(e.what());
    }
    matcher_thread = std::jthread([&] { matcher_api->listen(); });
    spdlog::info("matcher listening on {}:{}", config.wifi_matcher.host, config.wifi_matcher.port);
  }

  g_shutdown.store(false);
  auto old_int = std::signal(SIGINT, on_signal);
  auto old_term = std::signal(SIGTERM, on_signal);
  std::jthread watcher([&](std::stop_token st) {
    while (!st.stop_requested() && !g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    api.stop();
    if (matcher_api) matcher_api->stop();
  });
  spdlog::info("listening on {}:{}", config.server.host, port);
  api.listen();
  watcher.request_stop();
  watcher.join();
  if (matcher_thread.joinable()) matcher_thread.join();
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  spdlog::info("shut down");
  return kOk;
}

// --- simulate -----------------------------------------------------------------

int cmd_simulate(const Options& opt) {
  RunManifest manifest;
  manifest.started_at = system_now();
  manifest.code_version = kVersion;
  manifest.config_path = opt.config;
  const std::string bytes = read_file(opt.config);
  manifest.config_digest = sha256_hex(bytes);
  sim::ScenarioConfig scenario;
  try {
    scenario = sim::scenario_from_json(parse_json(bytes, opt.config));
  } catch (const json::exception& e) {
    throw ConfigFailure("scenario " + opt.config + ": " + e.what());
  } catch (const sim::InfeasibleConfig& e) {
    throw ConfigFailure("scenario " + opt.config + ": " + e.what());
  }
  if (opt.seed) scenario.seed = *opt.seed;
  manifest.seeds.push_back(scenario.seed);
  if (opt.out.empty()) throw ConfigFailure("simulate requires --out");
  const fs::path out_dir = opt.out;
  ensure_dir(out_dir);

  auto emit = [&](const std::string& name, auto&& write) {
    auto out = open_output(out_dir / name);
    write(out);
    if (!out) throw EnvironmentFailure("write failed: " + (out_dir / name).string());
    manifest.outputs.push_back(name);
    spdlog::info("wrote {}", (out_dir / name).string());
  };

  try {
    bool any = false;
    if (scenario.critical_mass) {
      any = true;
      spdlog::info("critical mass: {} rates x {} replicates", scenario.critical_mass->adoption_rates.size(),
                   scenario.critical_mass->replicates);
      const auto r = sim::exp_critical_mass(scenario.population, scenario.params.epi, *scenario.critical_mass,
                                            scenario.seed);
      emit("critical_mass.csv", [&](std::ostream& o) { sim::write_critical_mass_csv(o, r); });
    }
    if (scenario.distortion) {
      any = true;
      spdlog::info("distance distortion: {} pairs per rate", scenario.distortion->pairs);
      const auto world = sim::generate_world(scenario.population, sim::world_seed(scenario.seed, 0));
      const auto rows = sim::exp_distance_distortion(world, scenario.params.epi, *scenario.distortion,
                                                     sim::run_seed(scenario.seed, 0));
      emit("distortion.csv", [&](std::ostream& o) { sim::write_distortion_csv(o, rows); });
    }
    if (scenario.intervention) {
      any = true;
      spdlog::info("intervention: {} scenarios x {} replicates", scenario.intervention->scenarios.size(),
                   scenario.intervention->replicates);
      const auto r = sim::exp_intervention_impact(scenario.population, scenario.params, *scenario.intervention,
                                                  scenario.seed);
      emit("intervention.csv", [&](std::ostream& o) { sim::write_intervention_csv(o, r); });
    }
    if (scenario.copresence_attack) {
      any = true;
      const auto outcomes = sim::exp_copresence_attack(scenario.seed);
      emit("copresence_attack.csv", [&](std::ostream& o) { sim::write_attack_csv(o, outcomes); });
    }
    if (!any) {
      // No experiment selected: a single run with its daily trajectory.
      auto world = std::make_shared<const sim::SimWorld>(
          sim::generate_world(scenario.population, sim::world_seed(scenario.seed, 0)));
      sim::Simulation simulation(world, scenario.params, sim::run_seed(scenario.seed, 0));
      const auto r = simulation.run(scenario.max_days);
      emit("trajectory.csv", [&](std::ostream& o) {
        o << "day,s,e,i,r,new_exposures,blocked,averted,reports,alert_onsets,precautions_active\n";
        for (const auto& d : r.history) {
          o << d.day << ',' << d.s << ',' << d.e << ',' << d.i << ',' << d.r << ',' << d.new_exposures << ','
            << d.blocked << ',' << d.averted << ',' << d.reports << ',' << d.alert_onsets << ','
            << d.precautions_active << '\n';
        }
      });
    }
  } catch (const sim::InfeasibleConfig& e) {
    throw ConfigFailure(std::string("infeasible scenario: ") + e.what());
  }

  manifest.finished_at = system_now();
  auto out = open_output(out_dir / "manifest.json");
  out << to_json(manifest).dump(2) << '\n';
  return kOk;
}

// --- chart / replay -----------------------------------------------------------

std::unique_ptr<SignalServer> replay_state(const ServiceConfig& config) {
  if (!fs::is_directory(config.server.state_dir)) {
    throw EnvironmentFailure("state directory " + config.server.state_dir.string() + " does not exist");
  }
  return SignalServer::replay(config, std::make_shared<SeededEntropy>(0));
}

int cmd_chart(const Options& opt) {
  const auto config = load_service_config(opt.config);
  if (opt.device.empty() || opt.from.empty() || opt.to.empty()) {
    throw ConfigFailure("chart requires --device, --from and --to");
  }
  const auto device = DeviceId::parse(opt.device);
  if (!device) throw ConfigFailure("--device is not a UUID: " + opt.device);
  const Timestamp t0 = parse_time_flag(opt.from, "--from");
  const Timestamp t1 = parse_time_flag(opt.to, "--to");
  const auto step = parse_duration(opt.step);
  if (!step || *step <= 0) throw ConfigFailure("--step must be a positive duration like 1d or 6h");
  if (t1 < t0) throw ConfigFailure("--to is before --from");

  const auto server = replay_state(config);
  if (!server->is_registered(*device)) {
    spdlog::error("unknown device {}", device->to_string());
    return kRuntimeError;
  }
  const auto frames = server->charts().export_frames(*device, t0, t1, *step);
  if (opt.out.empty()) {
    write_frames_csv(std::cout, frames);
  } else {
    ensure_dir(opt.out);
    auto out = open_output(fs::path(opt.out) / "frames.csv");
    write_frames_csv(out, frames);
  }
  return kOk;
}

int cmd_replay(const Options& opt) {
  const auto config = load_service_config(opt.config);
  const Timestamp as_of = opt.to.empty() ? system_now() : parse_time_flag(opt.to, "--to");
  const auto server = replay_state(config);
  const auto graph = server->graph_at(as_of);
  const auto h = server->health();
  json summary{{"devices", h.devices},
               {"events", h.events},
               {"reports", h.reports},
               {"edges", graph->edge_count()},
               {"as_of", format_timestamp(as_of)}};
  if (!opt.out.empty()) {
    ensure_dir(opt.out);
    {
      auto out = open_output(fs::path(opt.out) / "edges.txt");
      graph->write_edge_list(out);
    }
    auto out = open_output(fs::path(opt.out) / "charts.ndjson");
    for (const auto& d : server->devices()) {
      json line = to_json(server->chart(d, as_of));
      line["device"] = d.to_string();
      out << line.dump() << '\n';
    }
  }
  std::cout << summary.dump() << '\n';
  return kOk;
}

}  // namespace

json to_json(const RunManifest& m) {
  return json{{"config_digest", m.config_digest},
              {"config_path", m.config_path},
              {"seeds", m.seeds},
              {"code_version", m.code_version},
              {"started_at", format_timestamp(m.started_at)},
              {"finished_at", format_timestamp(m.finished_at)},
              {"outputs", m.outputs}};
}

std::optional<Seconds> parse_duration(std::string_view text) {
  if (text.empty()) return std::nullopt;
  Seconds unit = 1;
  switch (text.back()) {
    case 's':
      text.remove_suffix(1);
      break;
    case 'm':
      unit = kMinute;
      text.remove_suffix(1);
      break;
    case 'h':
      unit = kHour;
      text.remove_suffix(1);
      break;
    case 'd':
      unit = kDay;
      text.remove_suffix(1);
      break;
    default:
      break;
  }
  if (text.empty() || text.size() > 12) return std::nullopt;
  Seconds value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value * unit;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

void request_shutdown() { g_shutdown.store(true); }

int run(int argc, char** argv) {
  setup_logging();
  CLI::App app{"netdist: network-distance exposure charts and epidemic experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file")->required();
    sub->add_option("--seed", seed, "Overrides the configured seed");
  };
  auto* serve = app.add_subcommand("serve", "Run the signal server (and the Wi-Fi matcher if configured)");
  add_common(serve);
  auto* simulate = app.add_subcommand("simulate", "Run the experiments selected in a scenario file");
  add_common(simulate);
  simulate->add_option("--out", opt.out, "Output directory")->required();
  auto* chart = app.add_subcommand("chart", "Emit chart frames for one device from persisted state");
  add_common(chart);
  chart->add_option("--device", opt.device, "Device UUID")->required();
  chart->add_option("--from", opt.from, "First frame, ISO-8601 UTC")->required();
  chart->add_option("--to", opt.to, "Last frame, ISO-8601 UTC")->required();
  chart->add_option("--step", opt.step, "Frame spacing, e.g. 1d, 6h, 30m")->capture_default_str();
  chart->add_option("--out", opt.out, "Write frames.csv here instead of stdout");
  auto* replay = app.add_subcommand("replay", "Rebuild state from the logs and dump edges and charts");
  add_common(replay);
  replay->add_option("--to", opt.to, "Graph and chart time, ISO-8601 UTC (default: now)");
  replay->add_option("--out", opt.out, "Write edges.txt and charts.ndjson here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  for (auto* sub : {serve, simulate, chart, replay}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed = seed;
  }

  try {
    if (serve->parsed()) return cmd_serve(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (chart->parsed()) return cmd_chart(opt);
    return cmd_replay(opt);
  } catch (const ConfigFailure& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const EnvironmentFailure& e) {
    spdlog::error("{}", e.what());
    return kEnvironmentError;
  } catch (const ReplayError& e) {
    spdlog::error("corrupt state: {}", e.what());
    return kRuntimeError;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kEnvironmentError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data());
}

}  // namespace netdist::cli
