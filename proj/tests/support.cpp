#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace netdist::test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "netdist-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ServiceConfig service_config(const fs::path& state_dir) {
  ServiceConfig c;
  c.tokens.authorities.push_back(AuthorityConfig{"clinic", "clinic-secret", {}});
  if (!state_dir.empty()) {
    c.server.state_dir = state_dir;
    c.server.fsync = false;
  }
  return c;
}

std::vector<DetectionRecord> ble_meeting(const DeviceId& x, const DeviceId& y, Timestamp start, int minutes,
                                         const std::string& tag, int rssi, int every) {
  std::vector<DetectionRecord> out;
  const std::string tx = tag + "-x";
  const std::string ty = tag + "-y";
  for (int m = 0; m <= minutes; m += every) {
    for (int side = 0; side < 2; ++side) {
      DetectionRecord rec;
      rec.reporter = side == 0 ? x : y;
      rec.channel = Channel::kBle;
      rec.own_temp_id = side == 0 ? tx : ty;
      rec.peer_temp_id = side == 0 ? ty : tx;
      rec.timestamp = start + m * kMinute;
      rec.rssi = rssi;
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace netdist::test
