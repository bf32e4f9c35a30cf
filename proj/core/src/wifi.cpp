#include "netdist/wifi.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <set>

namespace netdist {

HashedBssid hash_bssid(std::string_view bssid, std::string_view salt) {
  // Normalize so that "AA:BB:..." and "aa:bb:..." hash alike.
  std::string normalized(bssid);
  std::transform(normalized.begin(), normalized.end(), normalized.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), salt.data(), salt.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), "\x1f", 1) != 1 ||
      EVP_DigestUpdate(ctx.get(), normalized.data(), normalized.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &md_len) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  HashedBssid out;
  out.digest.reserve(2 * md_len);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.digest.push_back(kHex[md[i] >> 4]);
    out.digest.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

namespace {

std::int64_t epoch_index(Timestamp t, Seconds epoch) { return t / epoch - ((t % epoch != 0) && (t < 0)); }

}  // namespace

std::vector<SingleUsePair> match_round(std::span<const WifiSubmission> submissions, Seconds epoch) {
  std::set<std::string> seen;
  std::map<std::pair<std::string, std::int64_t>, std::vector<SingleUseId>> buckets;
  for (const auto& s : submissions) {
    if (!seen.insert(s.single_use.id).second) {
      throw DuplicateSingleUseId("single-use id submitted twice in one round: " + s.single_use.id);
    }
    buckets[{s.hash.digest, epoch_index(s.timestamp, epoch)}].push_back(s.single_use);
  }
  std::vector<SingleUsePair> pairs;
  for (auto& [_, ids] : buckets) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        pairs.push_back({ids[i], ids[j]});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

// ---------------------------------------------------------------------------
// WifiMatcher

WifiMatcher::WifiMatcher(const WifiMatcherConfig& config, std::shared_ptr<Entropy> entropy)
    : config_(config), entropy_(std::move(entropy)) {}

WifiTempId WifiMatcher::resolve_bssid(const HashedBssid& hash, Timestamp now) {
  std::lock_guard lock(mutex_);
  purge_locked(now);
  const std::int64_t epoch = epoch_index(now, config_.epoch());
  auto [it, inserted] = temp_ids_.try_emplace({epoch, hash.digest});
  if (inserted) {
    it->second = WifiTempId{"w" + random_hex(*entropy_, 12), epoch * config_.epoch(), config_.epoch()};
  }
  return it->second;
}

void WifiMatcher::submit(const WifiSubmission& submission, Timestamp now) {
  std::lock_guard lock(mutex_);
  purge_locked(now);
  for (const auto& s : open_) {
    if (s.single_use == submission.single_use) {
      throw DuplicateSingleUseId("single-use id submitted twice in one round: " + s.single_use.id);
    }
  }
  open_.push_back(submission);
}

WifiMatcher::ClosedRound WifiMatcher::close_round(Timestamp now) {
  std::lock_guard lock(mutex_);
  ClosedRound closed{round_, match_round(open_, config_.epoch())};
  if (config_.retention() > 0) {
    retained_.push_back({now, std::move(open_)});
  }
  open_.clear();
  ++round_;
  purge_locked(now);
  return closed;
}

std::uint64_t WifiMatcher::current_round() const {
  std::lock_guard lock(mutex_);
  return round_;
}

void WifiMatcher::purge(Timestamp now) {
  std::lock_guard lock(mutex_);
  purge_locked(now);
}

void WifiMatcher::purge_locked(Timestamp now) {
  std::erase_if(temp_ids_, [&](const auto& kv) { return kv.second.issued_at + kv.second.ttl <= now; });
  std::erase_if(retained_, [&](const Retained& r) { return r.closed_at + config_.retention() <= now; });
}

std::size_t WifiMatcher::retained_submissions(Timestamp now) {
  std::lock_guard lock(mutex_);
  purge_locked(now);
  std::size_t n = 0;
  for (const auto& r : retained_) n += r.submissions.size();
  return n;
}

std::vector<std::string> WifiMatcher::dump(Timestamp now) {
  std::lock_guard lock(mutex_);
  purge_locked(now);
  std::vector<std::string> out;
  for (const auto& [key, temp] : temp_ids_) {
    out.push_back(key.second);
    out.push_back(temp.id);
  }
  auto add = [&](const WifiSubmission& s) {
    out.push_back(s.single_use.id);
    out.push_back(s.hash.digest);
    out.push_back(std::to_string(s.timestamp));
  };
  for (const auto& s : open_) add(s);
  for (const auto& r : retained_) {
    for (const auto& s : r.submissions) add(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Main-server side

void SingleUseRegistry::announce(const SingleUseId& id, const DeviceId& device, Timestamp now) {
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(id.id, Entry{device, now});
}

std::optional<SingleUseRegistry::Entry> SingleUseRegistry::lookup(const SingleUseId& id) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(id.id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SingleUseRegistry::forget(const SingleUseId& id) {
  std::lock_guard lock(mutex_);
  entries_.erase(id.id);
}

void SingleUseRegistry::expire_before(Timestamp cutoff) {
  std::lock_guard lock(mutex_);
  std::erase_if(entries_, [&](const auto& kv) { return kv.second.announced_at < cutoff; });
}

std::size_t SingleUseRegistry::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

LinkResult link_pairs(std::span<const SingleUsePair> pairs, const SingleUseRegistry& registry) {
  LinkResult result;
  std::set<WifiObservation> unique;
  for (const auto& p : pairs) {
    auto x = registry.lookup(p.first);
    auto y = registry.lookup(p.second);
    if (!x || !y) {
      ++result.dropped;
      continue;
    }
    if (x->device == y->device) continue;
    const Timestamp t = std::max(x->announced_at, y->announced_at);
    unique.insert(x->device < y->device ? WifiObservation{x->device, y->device, t}
                                        : WifiObservation{y->device, x->device, t});
  }
  result.observations.assign(unique.begin(), unique.end());
  return result;
}

std::pair<DetectionRecord, DetectionRecord> observation_records(const WifiObservation& obs) {
  std::uint64_t key[4] = {};
  for (int i = 0; i < 8; ++i) {
    key[0] = (key[0] << 8) | obs.a.bytes()[i];
    key[1] = (key[1] << 8) | obs.a.bytes()[i + 8];
    key[2] = (key[2] << 8) | obs.b.bytes()[i];
    key[3] = (key[3] << 8) | obs.b.bytes()[i + 8];
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "link-%016llx",
                static_cast<unsigned long long>(
                    keyed_hash({key[0], key[1], key[2], key[3], static_cast<std::uint64_t>(obs.timestamp)})));
  DetectionRecord ra;
  ra.reporter = obs.a;
  ra.channel = Channel::kWifi;
  ra.timestamp = obs.timestamp;
  ra.wifi_temp_id = buf;
  DetectionRecord rb = ra;
  rb.reporter = obs.b;
  return {ra, rb};
}

}  // namespace netdist
