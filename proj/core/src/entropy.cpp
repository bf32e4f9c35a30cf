#include "netdist/entropy.hpp"

#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace netdist {

std::uint64_t Entropy::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v = 0;
  std::memcpy(&v, buf, sizeof v);
  return v;
}

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  if (out.empty()) {
    return;
  }
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
}

void SeededEntropy::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mutex_);
  std::size_t i = 0;
  while (i < out.size()) {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t word = mix64(state_);
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word);
      word >>= 8;
    }
  }
}

std::string random_hex(Entropy& entropy, std::size_t n_bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::vector<std::uint8_t> buf(n_bytes);
  entropy.fill(buf);
  std::string out;
  out.reserve(2 * n_bytes);
  for (auto b : buf) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

}  // namespace netdist
