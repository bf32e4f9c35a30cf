#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <thread>

#include "netdist/cases.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace netdist;
using namespace netdist::test;

namespace {

TokenConfig token_config() {
  TokenConfig c;
  c.authorities.push_back({"clinic", "clinic-secret", ""});
  c.authorities.push_back({"north-health", "n-secret", "north"});
  return c;
}

TokenStore store(std::uint64_t seed = 1) { return TokenStore(token_config(), std::make_shared<SeededEntropy>(seed)); }

template <class T>
bool holds(const std::variant<TokenStore::Grant, RedeemError>& r, T expected) {
  if constexpr (std::is_same_v<T, RedeemError>) {
    return std::holds_alternative<RedeemError>(r) && std::get<RedeemError>(r) == expected;
  } else {
    return std::holds_alternative<TokenStore::Grant>(r) && std::get<TokenStore::Grant>(r).kind == expected;
  }
}

}  // namespace

TEST(Issue, ThreeDistinctPositiveTokens) {
  auto s = store();
  const auto tokens = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 3, kT0);
  ASSERT_EQ(tokens.size(), 3u);
  std::set<std::string> distinct;
  for (const auto& t : tokens) {
    distinct.insert(t.token);
    EXPECT_EQ(t.kind, CaseKind::kPositive);
    EXPECT_FALSE(t.consumed);
    EXPECT_EQ(t.expires_at, kT0 + 72 * kHour);
    EXPECT_EQ(t.token.size(), 19u);
    EXPECT_EQ(normalize_token(t.token), t.token);
  }
  EXPECT_EQ(distinct.size(), 3u);
}

TEST(Issue, ContactKindAndZeroCount) {
  auto s = store();
  const auto tokens = s.issue("clinic", "clinic-secret", CaseKind::kContact, 1, kT0);
  ASSERT_EQ(tokens.size(), 1u);
  EXPECT_EQ(tokens[0].kind, CaseKind::kContact);
  EXPECT_TRUE(s.issue("clinic", "clinic-secret", CaseKind::kContact, 0, kT0).empty());
}

TEST(Issue, WrongSecretOrUnknownAuthorityIsUnauthorized) {
  auto s = store();
  EXPECT_THROW(s.issue("clinic", "guess", CaseKind::kPositive, 1, kT0), UnauthorizedAuthority);
  EXPECT_THROW(s.issue("nobody", "clinic-secret", CaseKind::kPositive, 1, kT0), UnauthorizedAuthority);
  EXPECT_THROW(s.issue("clinic", "clinic-secret", CaseKind::kPositive, -1, kT0), std::invalid_argument);
  EXPECT_EQ(s.size(), 0u);
}

TEST(Issue, HundredThousandTokensNeverCollide) {
  auto s = TokenStore(token_config(), std::make_shared<SystemEntropy>());
  const auto tokens = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 100'000, kT0);
  std::set<std::string> distinct;
  for (const auto& t : tokens) distinct.insert(t.token);
  EXPECT_EQ(distinct.size(), 100'000u);
  EXPECT_EQ(s.size(), 100'000u);
}

TEST(Redeem, ValidTokenOnce) {
  auto s = store();
  const auto t = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 1, kT0)[0];
  EXPECT_TRUE(holds(s.consume(t.token, "", kT0 + kHour), CaseKind::kPositive));
  EXPECT_TRUE(holds(s.consume(t.token, "", kT0 + kHour), RedeemError::kAlreadyConsumed));
}

TEST(Redeem, LooseFormattingIsAccepted) {
  auto s = store();
  const auto t = s.issue("clinic", "clinic-secret", CaseKind::kContact, 1, kT0)[0];
  std::string loose;
  for (char c : t.token) {
    if (c != '-') loose += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  EXPECT_TRUE(holds(s.consume(" " + loose + " ", "", kT0), CaseKind::kContact));
}

TEST(Redeem, ExpiresAfterValidity) {
  auto s = store();
  const auto t = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 2, kT0);
  EXPECT_TRUE(holds(s.consume(t[0].token, "", kT0 + 72 * kHour), RedeemError::kExpired));
  EXPECT_TRUE(holds(s.consume(t[1].token, "", kT0 + 72 * kHour - 1), CaseKind::kPositive));
}

TEST(Redeem, UnknownTokens) {
  auto s = store();
  EXPECT_TRUE(holds(s.consume("AAAA-AAAA-AAAA-AAAA", "", kT0), RedeemError::kUnknownToken));
  EXPECT_TRUE(holds(s.consume("not a token", "", kT0), RedeemError::kUnknownToken));
}

TEST(Redeem, CommunityScopedAuthority) {
  auto s = store();
  const auto t = s.issue("north-health", "n-secret", CaseKind::kPositive, 2, kT0);
  EXPECT_TRUE(holds(s.consume(t[0].token, "south", kT0), RedeemError::kWrongCommunityScope));
  EXPECT_TRUE(holds(s.consume(t[0].token, "north", kT0), CaseKind::kPositive));
  // A failed scope check does not burn the token.
  EXPECT_TRUE(holds(s.consume(t[1].token, "", kT0), RedeemError::kWrongCommunityScope));
  EXPECT_TRUE(holds(s.consume(t[1].token, "north", kT0), CaseKind::kPositive));
}

TEST(Redeem, ConcurrentAttemptsExactlyOneWins) {
  for (int round = 0; round < 20; ++round) {
    auto s = store(static_cast<std::uint64_t>(round));
    const auto t = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 1, kT0)[0];
    std::atomic<int> wins{0};
    std::atomic<int> consumed{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
        const auto r = s.consume(t.token, "", kT0);
        if (std::holds_alternative<TokenStore::Grant>(r)) ++wins;
        if (holds(r, RedeemError::kAlreadyConsumed)) ++consumed;
      });
    }
    for (auto& th : threads) th.join();
    ASSERT_EQ(wins.load(), 1);
    ASSERT_EQ(consumed.load(), 7);
  }
}

TEST(Persistence, SnapshotIsSortedAndRoundTrips) {
  auto s = store();
  auto issued = s.issue("clinic", "clinic-secret", CaseKind::kPositive, 20, kT0);
  s.consume(issued[3].token, "", kT0);
  const auto all = s.all();
  ASSERT_EQ(all.size(), 20u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), [](auto& a, auto& b) { return a.token < b.token; }));

  auto restored = store(2);
  for (const auto& t : all) restored.restore(token_from_json(to_json(t)));
  EXPECT_TRUE(holds(restored.consume(issued[3].token, "", kT0), RedeemError::kAlreadyConsumed));
  EXPECT_TRUE(holds(restored.consume(issued[4].token, "", kT0), CaseKind::kPositive));
  // Tokens carry no device reference.
  EXPECT_FALSE(to_json(all[0]).contains("device"));
}

TEST(Reports, ContactReportsHaveNoSymptomStart) {
  SeededEntropy e(3);
  const auto id = device_ids(1, 3)[0];
  const auto r = make_report(e, id, CaseKind::kContact, parse_date("2021-05-30"), kT0);
  EXPECT_FALSE(r.symptom_start);
  const auto p = make_report(e, id, CaseKind::kPositive, parse_date("2021-05-30"), kT0);
  ASSERT_TRUE(p.symptom_start);
  EXPECT_NE(p.case_id, r.case_id);
  const auto back = report_from_json(to_json(p));
  EXPECT_EQ(back.case_id, p.case_id);
  EXPECT_EQ(back.device, id);
  EXPECT_EQ(back.symptom_start, p.symptom_start);
  EXPECT_EQ(back.reported_at, kT0);
  EXPECT_FALSE(to_json(p).contains("token"));
}

TEST(Tokens, FormatAndNormalize) {
  const std::array<std::uint8_t, 10> zeros{};
  EXPECT_EQ(format_token(zeros), "AAAA-AAAA-AAAA-AAAA");
  std::array<std::uint8_t, 10> ones;
  ones.fill(0xff);
  EXPECT_EQ(format_token(ones), "7777-7777-7777-7777");
  EXPECT_EQ(normalize_token("aaaa aaaa-aaaa aaaa"), "AAAA-AAAA-AAAA-AAAA");
  EXPECT_FALSE(normalize_token("AAAA-AAAA-AAAA-AAA"));
  EXPECT_FALSE(normalize_token("AAAA-AAAA-AAAA-AAA1"));
  EXPECT_EQ(to_string(RedeemError::kAlreadyConsumed), "already-consumed");
  EXPECT_EQ(parse_case_kind(to_string(CaseKind::kContact)), CaseKind::kContact);
}

TEST(Amplification, Edges) {
  EXPECT_EQ(amplification_probability(0, 0.3), 0.0);
  EXPECT_EQ(amplification_probability(5, 1.0), 1.0);
  EXPECT_EQ(amplification_probability(5, 0.0), 0.0);
  EXPECT_NEAR(amplification_probability(11, 0.2), 0.9141, 1e-4);
  EXPECT_THROW(amplification_probability(-1, 0.5), std::invalid_argument);
  EXPECT_THROW(amplification_probability(3, 1.5), std::invalid_argument);
}

TEST(Amplification, MatchesMonteCarlo) {
  for (int n : {1, 3, 11, 25}) {
    for (double p : {0.05, 0.2, 0.5}) {
      const auto check = amplification(n, p, 100'000, static_cast<std::uint64_t>(n * 100 + p * 10));
      EXPECT_TRUE(check.pass) << n << " " << p << ": " << check.detail;
    }
  }
}
