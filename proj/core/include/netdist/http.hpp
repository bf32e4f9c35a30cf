#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "netdist/server.hpp"
#include "netdist/time.hpp"
#include "netdist/wifi.hpp"

namespace netdist {

using Clock = std::function<Timestamp()>;

/// Wall clock in whole seconds.
Timestamp system_now();

/// The listening socket could not be opened.
class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON API of the signal server.
///
///   POST /v1/devices                 {community?}                 -> 201 {device_id}
///   POST /v1/detections              record | [record, ...]       -> 200 {status[, reason]} | {results}
///   POST /v1/admin/tokens            Bearer; {kind, count}        -> 201 {tokens: [...]}
///   POST /v1/reports                 X-Device-Id; {token, symptom_start} -> 201 {case_id, kind}
///   POST /v1/wifi/single-use         X-Device-Id; {single_use_id} -> 204
///   GET  /v1/chart/{device}                                       -> {positive, contact, as_of}
///   GET  /v1/network-chart/{device}                               -> [12 ints]
///   GET  /v1/health                                               -> {status, generation, ...}
///
/// Errors are {error: "<reason>"} with a 4xx status.
class HttpFrontend {
 public:
  explicit HttpFrontend(SignalServer& server, Clock clock = system_now);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws BindError.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// JSON API of the Wi-Fi matching entity.
///
///   POST /v1/wifi/resolve      {hashed_bssid}                              -> {temp_id, issued_at, ttl}
///   POST /v1/wifi/submit       {single_use_id, hashed_bssid, timestamp}    -> 202
///   POST /v1/wifi/close-round  Bearer deployment secret                    -> {round, pairs: [[s1, s2], ...]}
class MatcherFrontend {
 public:
  MatcherFrontend(WifiMatcher& matcher, std::string secret, Clock clock = system_now);
  ~MatcherFrontend();
  MatcherFrontend(const MatcherFrontend&) = delete;
  MatcherFrontend& operator=(const MatcherFrontend&) = delete;

  int bind(const std::string& host, int port);
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace netdist
