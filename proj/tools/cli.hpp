#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/time.hpp"

namespace netdist::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kEnvironmentError = 3, kRuntimeError = 4 };

/// Bad or missing configuration; exit 2.
class ConfigFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem, network or other environment problem; exit 3.
class EnvironmentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  /// SHA-256 of the config file bytes, hex.
  std::string config_digest;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string code_version;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
  /// Relative to the output directory.
  std::vector<std::string> outputs;
};

nlohmann::json to_json(const RunManifest& m);

/// "90", "90s", "15m", "6h", "1d".
std::optional<Seconds> parse_duration(std::string_view text);

std::string sha256_hex(std::string_view bytes);

/// Entry point of the `netdist` binary: serve | simulate | chart | replay.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

/// Asks a running `serve` to shut down cleanly. Async-signal-safe.
void request_shutdown();

}  // namespace netdist::cli
