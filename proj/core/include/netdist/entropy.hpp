#pragma once

#include <cstdint>
#include <initializer_list>
#include <mutex>
#include <span>
#include <string>

namespace netdist {

/// Source of random bytes for identifiers and tokens.
class Entropy {
 public:
  virtual ~Entropy() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemEntropy final : public Entropy {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic stream for simulations and tests. Not for production secrets.
class SeededEntropy final : public Entropy {
 public:
  explicit SeededEntropy(std::uint64_t seed) : state_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mutex_;
  std::uint64_t state_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based hash of a key tuple; the basis for common random numbers.
constexpr std::uint64_t keyed_hash(std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t k : key) {
    h = mix64(h ^ mix64(k));
  }
  return h;
}

/// Uniform double in [0, 1) determined entirely by the key.
constexpr double keyed_uniform(std::initializer_list<std::uint64_t> key) {
  return static_cast<double>(keyed_hash(key) >> 11) * 0x1.0p-53;
}

std::string random_hex(Entropy& entropy, std::size_t n_bytes);

}  // namespace netdist
