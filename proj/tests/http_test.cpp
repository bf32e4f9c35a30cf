#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "netdist/http.hpp"
#include "support.hpp"

using namespace netdist;
using namespace netdist::test;
using nlohmann::json;

namespace {

/// A server frontend on an ephemeral port with a settable clock.
class Running {
 public:
  explicit Running(ServiceConfig config = service_config())
      : server_(std::move(config), std::make_shared<SeededEntropy>(1)), frontend_(server_, [this] { return now.load(); }) {
    port_ = frontend_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { frontend_.listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 200 && !client_->Get("/v1/health"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~Running() {
    frontend_.stop();
    thread_.join();
  }

  httplib::Client& client() { return *client_; }
  SignalServer& server() { return server_; }
  int port() const { return port_; }

  std::string register_device() {
    auto r = client_->Post("/v1/devices", "{}", "application/json");
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body).at("device_id").get<std::string>();
  }

  std::atomic<Timestamp> now{kT0};

 private:
  SignalServer server_;
  HttpFrontend frontend_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json record(const std::string& reporter, const std::string& own, const std::string& peer, Timestamp t) {
  return json{{"reporter", reporter}, {"channel", "BLE"}, {"own_temp_id", own}, {"peer_temp_id", peer},
              {"timestamp", format_timestamp(t)}, {"rssi", -60}};
}

}  // namespace

TEST(Http, HealthAndRegistration) {
  Running r;
  auto h = r.client().Get("/v1/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(json::parse(h->body).at("status"), "ok");
  const auto id = r.register_device();
  EXPECT_TRUE(DeviceId::parse(id));
  EXPECT_EQ(json::parse(r.client().Get("/v1/health")->body).at("devices"), 1);
}

TEST(Http, FullReportFlow) {
  Running r;
  const auto a = r.register_device();
  const auto b = r.register_device();
  json batch = json::array();
  for (int m = 0; m <= 20; m += 5) {
    batch.push_back(record(a, "ta", "tb", kT0 - kDay + m * kMinute));
    batch.push_back(record(b, "tb", "ta", kT0 - kDay + m * kMinute));
  }
  auto ingest = r.client().Post("/v1/detections", batch.dump(), "application/json");
  ASSERT_EQ(ingest->status, 200) << ingest->body;
  for (const auto& res : json::parse(ingest->body).at("results")) EXPECT_EQ(res.at("status"), "accepted");
  auto dup = r.client().Post("/v1/detections", batch[0].dump(), "application/json");
  EXPECT_EQ(json::parse(dup->body).at("status"), "duplicate");

  httplib::Headers admin{{"Authorization", "Bearer clinic-secret"}};
  auto issued = r.client().Post("/v1/admin/tokens", admin, R"({"kind":"POSITIVE","count":2})", "application/json");
  ASSERT_EQ(issued->status, 201) << issued->body;
  const auto tokens = json::parse(issued->body).at("tokens");
  ASSERT_EQ(tokens.size(), 2u);

  httplib::Headers as_a{{"X-Device-Id", a}};
  const json report{{"token", tokens[0].at("token")}, {"symptom_start", "2021-05-30"}};
  auto filed = r.client().Post("/v1/reports", as_a, report.dump(), "application/json");
  ASSERT_EQ(filed->status, 201) << filed->body;
  EXPECT_EQ(json::parse(filed->body).at("kind"), "POSITIVE");
  EXPECT_EQ(r.client().Post("/v1/reports", as_a, report.dump(), "application/json")->status, 409);

  auto chart = r.client().Get("/v1/chart/" + b);
  ASSERT_EQ(chart->status, 200);
  const auto body = json::parse(chart->body);
  EXPECT_EQ(body.at("positive").size(), 12u);
  EXPECT_EQ(body.at("positive")[0], 1);
  EXPECT_EQ(body.at("contact")[0], 0);
  EXPECT_EQ(body.at("as_of"), format_timestamp(kT0));

  auto network = r.client().Get("/v1/network-chart/" + a);
  EXPECT_EQ(json::parse(network->body)[0], 1);

  // Symptoms began 2021-05-30, so the signal is gone ten days later.
  r.now = parse_timestamp("2021-06-09T00:00:00Z");
  EXPECT_EQ(json::parse(r.client().Get("/v1/chart/" + b)->body).at("positive")[0], 0);
}

TEST(Http, ErrorStatuses) {
  Running r;
  const auto a = r.register_device();
  const auto stranger = "1b4e28ba-2fa1-41d2-883f-0016d3cca427";
  EXPECT_EQ(r.client().Get(std::string("/v1/chart/") + stranger)->status, 404);
  EXPECT_EQ(r.client().Get("/v1/chart/abcd-1234")->status, 400);
  EXPECT_EQ(r.client().Post("/v1/detections", "{not json", "application/json")->status, 400);
  auto stale = r.client().Post("/v1/detections", record(a, "x", "y", kT0 - 20 * kDay).dump(), "application/json");
  EXPECT_EQ(stale->status, 422);
  EXPECT_EQ(json::parse(stale->body).at("reason"), "stale-timestamp");
  auto unknown = r.client().Post("/v1/detections", record(stranger, "x", "y", kT0).dump(), "application/json");
  EXPECT_EQ(unknown->status, 422);

  EXPECT_EQ(r.client().Post("/v1/admin/tokens", R"({"kind":"POSITIVE"})", "application/json")->status, 401);
  httplib::Headers wrong{{"Authorization", "Bearer nope"}};
  EXPECT_EQ(r.client().Post("/v1/admin/tokens", wrong, R"({"kind":"POSITIVE"})", "application/json")->status, 401);
  httplib::Headers admin{{"Authorization", "Bearer clinic-secret"}};
  EXPECT_EQ(r.client().Post("/v1/admin/tokens", admin, R"({"kind":"SOMETHING"})", "application/json")->status, 400);
  EXPECT_EQ(r.client().Post("/v1/admin/tokens", admin, R"({"kind":"CONTACT","count":0})", "application/json")->status,
            400);

  httplib::Headers as_a{{"X-Device-Id", a}};
  EXPECT_EQ(r.client().Post("/v1/reports", R"({"token":"AAAA-AAAA-AAAA-AAAA"})", "application/json")->status, 400);
  EXPECT_EQ(r.client().Post("/v1/reports", as_a, R"({"token":"AAAA-AAAA-AAAA-AAAA"})", "application/json")->status,
            404);
  EXPECT_EQ(r.client().Post("/v1/reports", as_a, R"({"symptom_start":"2021-05-30"})", "application/json")->status,
            403);
  EXPECT_EQ(r.client().Post("/v1/reports", as_a, "{}", "application/json")->status, 400);

  auto tok = json::parse(
      r.client().Post("/v1/admin/tokens", admin, R"({"kind":"CONTACT","count":1})", "application/json")->body);
  r.now = kT0 + 72 * kHour;
  const json late{{"token", tok.at("tokens")[0].at("token")}};
  EXPECT_EQ(r.client().Post("/v1/reports", as_a, late.dump(), "application/json")->status, 410);
}

TEST(Http, SingleUseAnnouncements) {
  Running r;
  const auto a = r.register_device();
  httplib::Headers as_a{{"X-Device-Id", a}};
  EXPECT_EQ(r.client().Post("/v1/wifi/single-use", as_a, R"({"single_use_id":"s1"})", "application/json")->status,
            204);
  httplib::Headers stranger{{"X-Device-Id", "1b4e28ba-2fa1-41d2-883f-0016d3cca427"}};
  EXPECT_EQ(
      r.client().Post("/v1/wifi/single-use", stranger, R"({"single_use_id":"s2"})", "application/json")->status, 404);
}

TEST(Http, SecondBindOnTheSamePortFails) {
  Running r;
  SignalServer other(service_config(), std::make_shared<SeededEntropy>(2));
  HttpFrontend frontend(other);
  EXPECT_THROW(frontend.bind("127.0.0.1", r.port()), BindError);
}

TEST(Http, MatcherEndpoints) {
  WifiMatcher matcher(WifiMatcherConfig{}, std::make_shared<SeededEntropy>(3));
  std::atomic<Timestamp> now{kT0};
  MatcherFrontend frontend(matcher, "deploy-secret", [&] { return now.load(); });
  const int port = frontend.bind("127.0.0.1", 0);
  std::thread t([&] { frontend.listen(); });
  httplib::Client client("127.0.0.1", port);
  const std::string hash = hash_bssid("00:11:22:33:44:55", "salt").digest;
  httplib::Result resolved;
  for (int i = 0; i < 200 && !(resolved = client.Post("/v1/wifi/resolve", json{{"hashed_bssid", hash}}.dump(),
                                                       "application/json"));
       ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_TRUE(resolved);
  EXPECT_EQ(resolved->status, 200);
  EXPECT_EQ(json::parse(resolved->body).at("ttl"), 1200);

  for (const char* id : {"s1", "s2"}) {
    const json sub{{"single_use_id", id}, {"hashed_bssid", hash}, {"timestamp", format_timestamp(kT0)}};
    EXPECT_EQ(client.Post("/v1/wifi/submit", sub.dump(), "application/json")->status, 202);
  }
  const json again{{"single_use_id", "s1"}, {"hashed_bssid", hash}, {"timestamp", kT0}};
  EXPECT_EQ(client.Post("/v1/wifi/submit", again.dump(), "application/json")->status, 409);

  EXPECT_EQ(client.Post("/v1/wifi/close-round", "", "application/json")->status, 401);
  httplib::Headers auth{{"Authorization", "Bearer deploy-secret"}};
  auto closed = client.Post("/v1/wifi/close-round", auth, "", "application/json");
  ASSERT_EQ(closed->status, 200);
  const auto body = json::parse(closed->body);
  EXPECT_EQ(body.at("round"), 0);
  ASSERT_EQ(body.at("pairs").size(), 1u);
  EXPECT_EQ(body.at("pairs")[0], json::array({"s1", "s2"}));
  frontend.stop();
  t.join();
}
