#include "netdist/http.hpp"

#include <chrono>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace netdist {

using nlohmann::json;

Timestamp system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, std::string_view reason) {
  reply(res, status, json{{"error", reason}});
}

std::optional<std::string> bearer(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  return header.substr(prefix.size());
}

std::optional<DeviceId> device_header(const httplib::Request& req) {
  return DeviceId::parse(req.get_header_value("X-Device-Id"));
}

int status_for(RedeemError e) {
  switch (e) {
    case RedeemError::kUnknownToken:
    case RedeemError::kUnknownDevice:
      return 404;
    case RedeemError::kAlreadyConsumed:
      return 409;
    case RedeemError::kExpired:
      return 410;
    case RedeemError::kWrongCommunityScope:
    case RedeemError::kUnauthenticatedDisabled:
      return 403;
  }
  return 400;
}

/// Wraps a handler so malformed JSON and bad fields become 400s.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const json::exception& e) {
      fail(res, 400, std::string("malformed-request: ") + e.what());
    } catch (const MalformedRecord& e) {
      fail(res, 400, std::string("malformed-record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      fail(res, 400, e.what());
    }
  };
}

/// Shared bind/listen plumbing.
struct Listener {
  httplib::Server http;
  bool bound = false;

  Listener() {
    // The library default adds SO_REUSEPORT, which lets a second server
    // silently share the port. Address reuse alone still fails on conflict.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
  }

  int bind(const std::string& host, int port) {
    int actual = port;
    if (port == 0) {
      actual = http.bind_to_any_port(host);
    } else if (!http.bind_to_port(host, port)) {
      actual = -1;
    }
    if (actual < 0) throw BindError("cannot bind " + host + ":" + std::to_string(port));
    bound = true;
    return actual;
  }

  void listen() {
    if (!bound) throw std::logic_error("listen() before bind()");
    http.listen_after_bind();
  }
};

}  // namespace

struct HttpFrontend::Impl {
  SignalServer& server;
  Clock clock;
  Listener listener;

  Impl(SignalServer& s, Clock c) : server(s), clock(std::move(c)) { routes(); }

  void routes() {
    auto& http = listener.http;

    http.Post("/v1/devices", guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::string community;
                if (!req.body.empty()) community = json::parse(req.body).value("community", std::string{});
                const auto id = server.register_device(community);
                reply(res, 201, json{{"device_id", id.to_string()}});
              }));

    http.Post("/v1/detections", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = json::parse(req.body);
                const Timestamp now = clock();
                auto one = [&](const json& j) {
                  const auto result = server.ingest_detection(record_from_json(j), now);
                  if (!result.accepted()) return json{{"status", "rejected"}, {"reason", to_string(*result.rejected)}};
                  return json{{"status", result.duplicate ? "duplicate" : "accepted"}};
                };
                if (body.is_array()) {
                  json results = json::array();
                  for (const auto& j : body) results.push_back(one(j));
                  reply(res, 200, json{{"results", results}});
                } else {
                  const auto r = one(body);
                  reply(res, r["status"] == "rejected" ? 422 : 200, r);
                }
              }));

    http.Post("/v1/admin/tokens", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto secret = bearer(req);
                if (!secret) return fail(res, 401, "missing-bearer-token");
                const auto body = json::parse(req.body);
                const auto kind = parse_case_kind(body.at("kind").get<std::string>());
                if (!kind) return fail(res, 400, "bad-kind");
                const int count = body.value("count", 1);
                if (count < 1 || count > 10000) return fail(res, 400, "bad-count");
                try {
                  const auto tokens = server.issue_tokens_by_secret(*secret, *kind, count, clock());
                  json out = json::array();
                  for (const auto& t : tokens) {
                    out.push_back(json{{"token", t.token},
                                       {"kind", to_string(t.kind)},
                                       {"expires_at", format_timestamp(t.expires_at)}});
                  }
                  reply(res, 201, json{{"tokens", out}});
                } catch (const UnauthorizedAuthority&) {
                  fail(res, 401, "unauthorized");
                }
              }));

    http.Post("/v1/reports", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto device = device_header(req);
                if (!device) return fail(res, 400, "missing-device-id");
                const auto body = req.body.empty() ? json::object() : json::parse(req.body);
                std::optional<Date> symptom_start;
                if (auto it = body.find("symptom_start"); it != body.end() && !it->is_null()) {
                  symptom_start = parse_date(it->get<std::string>());
                }
                const Timestamp now = clock();
                std::variant<CaseReport, RedeemError> result = RedeemError::kUnknownToken;
                if (auto it = body.find("token"); it != body.end() && !it->is_null()) {
                  result = server.redeem(it->get<std::string>(), *device, symptom_start, now);
                } else {
                  if (!symptom_start) return fail(res, 400, "symptom_start-required");
                  result = server.self_report(*device, *symptom_start, now);
                }
                if (const auto* err = std::get_if<RedeemError>(&result)) return fail(res, status_for(*err), to_string(*err));
                const auto& report = std::get<CaseReport>(result);
                reply(res, 201, json{{"case_id", report.case_id}, {"kind", to_string(report.kind)}});
              }));

    http.Post("/v1/wifi/single-use", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto device = device_header(req);
                if (!device) return fail(res, 400, "missing-device-id");
                if (!server.is_registered(*device)) return fail(res, 404, "unknown-device");
                const auto body = json::parse(req.body);
                server.announce_single_use(SingleUseId{body.at("single_use_id").get<std::string>()}, *device, clock());
                res.status = 204;
              }));

    http.Get(R"(/v1/chart/([0-9a-fA-F-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto device = DeviceId::parse(req.matches[1].str());
               if (!device) return fail(res, 400, "bad-device-id");
               try {
                 reply(res, 200, to_json(server.chart(*device, clock())));
               } catch (const UnknownDevice&) {
                 fail(res, 404, "unknown-device");
               }
             }));

    http.Get(R"(/v1/network-chart/([0-9a-fA-F-]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto device = DeviceId::parse(req.matches[1].str());
               if (!device) return fail(res, 400, "bad-device-id");
               try {
                 reply(res, 200, json(server.network_chart(*device, clock()).counts));
               } catch (const UnknownDevice&) {
                 fail(res, 404, "unknown-device");
               }
             }));

    http.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      const auto h = server.health();
      reply(res, 200,
            json{{"status", "ok"},
                 {"generation", h.generation},
                 {"devices", h.devices},
                 {"events", h.events},
                 {"reports", h.reports}});
    });
  }
};

HttpFrontend::HttpFrontend(SignalServer& server, Clock clock)
    : impl_(std::make_unique<Impl>(server, std::move(clock))) {}
HttpFrontend::~HttpFrontend() { stop(); }
int HttpFrontend::bind(const std::string& host, int port) { return impl_->listener.bind(host, port); }
void HttpFrontend::listen() { impl_->listener.listen(); }
void HttpFrontend::stop() { impl_->listener.http.stop(); }

struct MatcherFrontend::Impl {
  WifiMatcher& matcher;
  std::string secret;
  Clock clock;
  Listener listener;

  Impl(WifiMatcher& m, std::string s, Clock c) : matcher(m), secret(std::move(s)), clock(std::move(c)) { routes(); }

  void routes() {
    auto& http = listener.http;

    http.Post("/v1/wifi/resolve", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = json::parse(req.body);
                const auto temp = matcher.resolve_bssid(HashedBssid{body.at("hashed_bssid").get<std::string>()}, clock());
                reply(res, 200,
                      json{{"temp_id", temp.id}, {"issued_at", format_timestamp(temp.issued_at)}, {"ttl", temp.ttl}});
              }));

    http.Post("/v1/wifi/submit", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto body = json::parse(req.body);
                WifiSubmission s;
                s.single_use = SingleUseId{body.at("single_use_id").get<std::string>()};
                s.hash = HashedBssid{body.at("hashed_bssid").get<std::string>()};
                const auto& ts = body.at("timestamp");
                s.timestamp = ts.is_string() ? parse_timestamp(ts.get<std::string>()) : ts.get<Timestamp>();
                try {
                  matcher.submit(s, clock());
                } catch (const DuplicateSingleUseId&) {
                  return fail(res, 409, "duplicate-single-use-id");
                }
                res.status = 202;
              }));

    http.Post("/v1/wifi/close-round", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto token = bearer(req);
                if (!token || *token != secret) return fail(res, 401, "unauthorized");
                const auto round = matcher.close_round(clock());
                json pairs = json::array();
                for (const auto& p : round.pairs) pairs.push_back(json::array({p.first.id, p.second.id}));
                reply(res, 200, json{{"round", round.round}, {"pairs", pairs}});
              }));
  }
};

MatcherFrontend::MatcherFrontend(WifiMatcher& matcher, std::string secret, Clock clock)
    : impl_(std::make_unique<Impl>(matcher, std::move(secret), std::move(clock))) {}
MatcherFrontend::~MatcherFrontend() { stop(); }
int MatcherFrontend::bind(const std::string& host, int port) { return impl_->listener.bind(host, port); }
void MatcherFrontend::listen() { impl_->listener.listen(); }
void MatcherFrontend::stop() { impl_->listener.http.stop(); }

}  // namespace netdist
