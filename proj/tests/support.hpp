#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/ingest.hpp"
#include "netdist/time.hpp"

namespace netdist::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// 2021-06-01T00:00:00Z; a convenient fixed "now" for scripted scenarios.
inline constexpr Timestamp kT0 = 1622505600;

/// Service config with one authority ("clinic" / "clinic-secret") and,
/// optionally, a state directory with fsync off.
ServiceConfig service_config(const std::filesystem::path& state_dir = {});

/// BLE samples of two devices standing together: both sides scan every
/// `every` minutes from `start` through `start + minutes`. Temporary ids are
/// derived from `tag` so distinct meetings never share them.
std::vector<DetectionRecord> ble_meeting(const DeviceId& x, const DeviceId& y, Timestamp start, int minutes,
                                         const std::string& tag, int rssi = -60, int every = 5);

}  // namespace netdist::test
