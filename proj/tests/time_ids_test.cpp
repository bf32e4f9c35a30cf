#include <gtest/gtest.h>

#include <unordered_set>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/entropy.hpp"
#include "netdist/ingest.hpp"
#include "netdist/time.hpp"

using namespace netdist;

TEST(Time, FormatsAndParsesUtc) {
  EXPECT_EQ(format_timestamp(0), "1970-01-01T00:00:00Z");
  EXPECT_EQ(format_timestamp(1622505600), "2021-06-01T00:00:00Z");
  EXPECT_EQ(parse_timestamp("2021-06-01T00:00:00Z"), 1622505600);
  EXPECT_EQ(parse_timestamp("2021-06-01T12:30Z"), 1622505600 + 12 * kHour + 30 * kMinute);
  EXPECT_EQ(parse_timestamp("2021-06-01"), 1622505600);
  EXPECT_EQ(parse_timestamp("2020-02-29T23:59:59Z"), 1583020799);
}

TEST(Time, RoundTripsAcrossYears) {
  for (Timestamp t = -400 * kDay; t < 60LL * 365 * kDay; t += 7 * kDay + 3 * kHour + 17) {
    ASSERT_EQ(parse_timestamp(format_timestamp(t)), t);
  }
}

TEST(Time, RejectsMalformedText) {
  EXPECT_THROW(parse_timestamp("2021-13-01"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("2021-02-30"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("2021-06-01T25:00:00Z"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("yesterday"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("2021-06-01T00:00:00+02:00"), std::invalid_argument);
  EXPECT_THROW(parse_date("2021/06/01"), std::invalid_argument);
}

TEST(Time, DatesAreUtcDays) {
  const Date d = parse_date("2021-06-01");
  EXPECT_EQ(format_date(d), "2021-06-01");
  EXPECT_EQ(start_of(d), 1622505600);
  EXPECT_EQ(date_of(1622505600 + kDay - 1), d);
  EXPECT_EQ(date_of(1622505600 + kDay).days_since_epoch, d.days_since_epoch + 1);
  EXPECT_EQ(date_of(-1).days_since_epoch, -1);
}

TEST(DeviceIds, AreVersionFourWithRfcVariant) {
  SystemEntropy entropy;
  for (int i = 0; i < 1000; ++i) {
    const auto id = DeviceId::generate(entropy);
    ASSERT_EQ(id.version(), 4);
    ASSERT_EQ(id.variant(), 0b10);
    const auto text = id.to_string();
    ASSERT_EQ(text.size(), 36u);
    ASSERT_EQ(text[14], '4');
    ASSERT_EQ(DeviceId::parse(text), id);
  }
}

TEST(DeviceIds, ParseIsCaseInsensitiveAndStrict) {
  const auto id = DeviceId::parse("1B4E28BA-2FA1-41D2-883F-0016D3CCA427");
  ASSERT_TRUE(id);
  EXPECT_EQ(id->to_string(), "1b4e28ba-2fa1-41d2-883f-0016d3cca427");
  EXPECT_FALSE(DeviceId::parse("1b4e28ba2fa141d2883f0016d3cca427"));
  EXPECT_FALSE(DeviceId::parse("1b4e28ba-2fa1-41d2-883f-0016d3cca42g"));
  EXPECT_FALSE(DeviceId::parse(""));
}

TEST(DeviceIds, TwoRegistrationsDiffer) {
  SystemEntropy entropy;
  DeviceRegistry registry;
  const auto a = registry.register_device(entropy);
  const auto b = registry.register_device(entropy);
  EXPECT_NE(a, b);
  EXPECT_TRUE(registry.contains(a));
  EXPECT_EQ(registry.size(), 2u);
}

TEST(DeviceIds, MillionDrawsHaveNoCollision) {
  SystemEntropy entropy;
  std::unordered_set<DeviceId> seen;
  seen.reserve(1'000'000);
  int collisions = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    if (!seen.insert(DeviceId::generate(entropy)).second) ++collisions;
  }
  EXPECT_EQ(collisions, 0);
  EXPECT_EQ(seen.size(), 1'000'000u);
}

TEST(Entropy, SeededStreamsRepeat) {
  SeededEntropy a(99);
  SeededEntropy b(99);
  SeededEntropy c(100);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_EQ(random_hex(a, 8).size(), 16u);
}

TEST(Entropy, KeyedUniformIsDeterministicAndInRange) {
  double sum = 0;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double u = keyed_uniform({7, k});
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_EQ(u, keyed_uniform({7, k}));
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
  EXPECT_NE(keyed_hash({1, 2}), keyed_hash({2, 1}));
}

TEST(Config, DefaultsMatchTheDocumentedValues) {
  const ServiceConfig c;
  EXPECT_EQ(c.ingest.proximity_minutes, 15);
  EXPECT_EQ(c.ingest.wifi_minutes, 180);
  EXPECT_DOUBLE_EQ(c.ingest.near_distance_m, 10.0);
  EXPECT_EQ(c.ingest.rssi_cutoff_db, -75);
  EXPECT_EQ(c.ingest.stitch_gap_minutes, 5);
  EXPECT_EQ(c.ingest.window_days, 14);
  EXPECT_EQ(c.ingest.clock_skew_minutes, 2);
  EXPECT_EQ(c.wifi_matcher.epoch_minutes, 20);
  EXPECT_EQ(c.wifi_matcher.retention_minutes, 0);
  EXPECT_EQ(c.graph.d_max, 12);
  EXPECT_EQ(c.chart.fade_days, 10);
  EXPECT_EQ(c.tokens.validity_hours, 72);
  EXPECT_FALSE(c.tokens.allow_unauthenticated_reports);
}

TEST(Config, JsonRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "ingest": {"proximity_minutes": 20, "rssi_cutoff_db": -70},
    "wifi_matcher": {"protocol": "pair_report", "retention_minutes": 120},
    "graph": {"d_max": 8},
    "tokens": {"authorities": [{"id": "a", "secret": "s", "community": "north"}]},
    "server": {"port": 9000, "state_dir": "/tmp/x"}
  })");
  const auto c = j.get<ServiceConfig>();
  EXPECT_EQ(c.ingest.proximity_minutes, 20);
  EXPECT_EQ(c.ingest.wifi_minutes, 180);
  EXPECT_EQ(c.ingest.rssi_cutoff_db, -70);
  EXPECT_EQ(c.wifi_matcher.protocol, WifiProtocol::kPairReport);
  EXPECT_EQ(c.wifi_matcher.retention_minutes, 120);
  EXPECT_EQ(c.graph.d_max, 8);
  ASSERT_EQ(c.tokens.authorities.size(), 1u);
  EXPECT_EQ(c.tokens.authorities[0].community, "north");
  EXPECT_EQ(c.server.port, 9000);
  EXPECT_EQ(c.server.state_dir, "/tmp/x");
  EXPECT_NO_THROW(validate(c));

  // Serialized configs never carry secrets.
  const auto dumped = nlohmann::json(c);
  EXPECT_EQ(dumped.dump().find("\"secret\""), std::string::npos);
  auto without_authorities = c;
  without_authorities.tokens.authorities.clear();
  const auto back = nlohmann::json(without_authorities).get<ServiceConfig>();
  EXPECT_EQ(back.ingest.proximity_minutes, 20);
  EXPECT_EQ(back.ingest.wifi_stitch_gap_minutes, 20);
  EXPECT_EQ(back.wifi_matcher.protocol, WifiProtocol::kPairReport);
  EXPECT_EQ(back.graph.d_max, 8);
}

TEST(Config, ValidateRejectsOutOfRange) {
  auto bad = [](auto mutate) {
    ServiceConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.wifi_matcher.epoch_minutes = 60; })), ConfigError);
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.wifi_matcher.retention_minutes = 241; })), ConfigError);
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.graph.d_max = 0; })), ConfigError);
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.ingest.proximity_minutes = 0; })), ConfigError);
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.chart.fade_days = 0; })), ConfigError);
  EXPECT_THROW(validate(bad([](ServiceConfig& c) { c.tokens.authorities.push_back({"x", "", ""}); })),
               ConfigError);
  EXPECT_THROW(nlohmann::json::parse(R"({"wifi_matcher": {"protocol": "carrier-pigeon"}})").get<ServiceConfig>(),
               ConfigError);
}
