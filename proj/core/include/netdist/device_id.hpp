#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "netdist/entropy.hpp"

namespace netdist {

/// Pseudonymous version-4 UUID assigned at install time.
class DeviceId {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  DeviceId() = default;
  explicit DeviceId(const Bytes& bytes) : bytes_(bytes) {}

  /// Fresh random v4 identifier.
  static DeviceId generate(Entropy& entropy);
  /// Canonical 8-4-4-4-12 hex form, case-insensitive.
  static std::optional<DeviceId> parse(std::string_view text);

  std::string to_string() const;
  const Bytes& bytes() const { return bytes_; }
  int version() const { return bytes_[6] >> 4; }
  /// The two most significant bits of byte 8 (0b10 for RFC 4122).
  int variant() const { return bytes_[8] >> 6; }

  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;

 private:
  Bytes bytes_{};
};

}  // namespace netdist

template <>
struct std::hash<netdist::DeviceId> {
  std::size_t operator()(const netdist::DeviceId& id) const noexcept {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    for (int i = 0; i < 8; ++i) {
      lo = (lo << 8) | id.bytes()[i];
      hi = (hi << 8) | id.bytes()[i + 8];
    }
    return static_cast<std::size_t>(netdist::mix64(lo ^ netdist::mix64(hi)));
  }
};
