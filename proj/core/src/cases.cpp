#include "netdist/cases.hpp"

#include <array>
#include <cctype>
#include <cmath>

namespace netdist {

using nlohmann::json;

namespace {

constexpr char kBase32[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

bool is_base32(char c) { return (c >= 'A' && c <= 'Z') || (c >= '2' && c <= '7'); }

std::string group(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && i % 4 == 0) out.push_back('-');
    out.push_back(raw[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(CaseKind kind) { return kind == CaseKind::kPositive ? "POSITIVE" : "CONTACT"; }

std::optional<CaseKind> parse_case_kind(std::string_view text) {
  if (text == "POSITIVE") return CaseKind::kPositive;
  if (text == "CONTACT") return CaseKind::kContact;
  return std::nullopt;
}

std::string_view to_string(RedeemError error) {
  switch (error) {
    case RedeemError::kUnknownToken:
      return "unknown-token";
    case RedeemError::kAlreadyConsumed:
      return "already-consumed";
    case RedeemError::kExpired:
      return "expired";
    case RedeemError::kWrongCommunityScope:
      return "wrong-community-scope";
    case RedeemError::kUnknownDevice:
      return "unknown-device";
    case RedeemError::kUnauthenticatedDisabled:
      return "unauthenticated-reports-disabled";
  }
  return "?";
}

json to_json(const CaseToken& t) {
  return json{{"token", t.token},           {"kind", to_string(t.kind)},     {"authority", t.authority},
              {"issued_at", t.issued_at},   {"expires_at", t.expires_at},   {"consumed", t.consumed}};
}

CaseToken token_from_json(const json& j) {
  CaseToken t;
  t.token = j.at("token").get<std::string>();
  auto kind = parse_case_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("bad token kind");
  t.kind = *kind;
  t.authority = j.at("authority").get<std::string>();
  t.issued_at = j.at("issued_at").get<Timestamp>();
  t.expires_at = j.at("expires_at").get<Timestamp>();
  t.consumed = j.at("consumed").get<bool>();
  return t;
}

json to_json(const CaseReport& r) {
  json j{{"case_id", r.case_id},
         {"device", r.device.to_string()},
         {"kind", to_string(r.kind)},
         {"reported_at", r.reported_at}};
  if (r.symptom_start) j["symptom_start"] = format_date(*r.symptom_start);
  return j;
}

CaseReport report_from_json(const json& j) {
  CaseReport r;
  r.case_id = j.at("case_id").get<std::string>();
  auto id = DeviceId::parse(j.at("device").get<std::string>());
  if (!id) throw std::invalid_argument("bad device id in report");
  r.device = *id;
  auto kind = parse_case_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("bad report kind");
  r.kind = *kind;
  r.reported_at = j.at("reported_at").get<Timestamp>();
  if (auto it = j.find("symptom_start"); it != j.end()) r.symptom_start = parse_date(it->get<std::string>());
  return r;
}

std::string format_token(std::span<const std::uint8_t, 10> bytes) {
  // 80 bits -> 16 five-bit symbols.
  std::string raw;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (auto b : bytes) {
    buffer = (buffer << 8) | b;
    bits += 8;
    while (bits >= 5) {
      raw.push_back(kBase32[(buffer >> (bits - 5)) & 0x1f]);
      bits -= 5;
    }
  }
  return group(raw);
}

std::optional<std::string> normalize_token(std::string_view text) {
  std::string raw;
  for (char c : text) {
    if (c == '-' || c == ' ' || c == '\t') continue;
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!is_base32(c)) return std::nullopt;
    raw.push_back(c);
  }
  if (raw.size() != 16) return std::nullopt;
  return group(raw);
}

// ---------------------------------------------------------------------------
// TokenStore

TokenStore::TokenStore(TokenConfig config, std::shared_ptr<Entropy> entropy)
    : config_(std::move(config)), entropy_(std::move(entropy)) {}

const AuthorityConfig* TokenStore::find_authority(std::string_view id) const {
  for (const auto& a : config_.authorities) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

std::vector<CaseToken> TokenStore::issue(std::string_view authority_id, std::string_view secret, CaseKind kind,
                                         int count, Timestamp now) {
  const auto* authority = find_authority(authority_id);
  if (authority == nullptr || authority->secret != secret) {
    throw UnauthorizedAuthority("unauthorized authority '" + std::string(authority_id) + "'");
  }
  if (count < 0) {
    throw std::invalid_argument("token count must be non-negative");
  }
  std::vector<CaseToken> issued;
  issued.reserve(static_cast<std::size_t>(count));
  std::lock_guard lock(mutex_);
  while (static_cast<int>(issued.size()) < count) {
    std::array<std::uint8_t, 10> bytes;
    entropy_->fill(bytes);
    CaseToken t{format_token(bytes), kind, authority->id, now, now + config_.validity(), false};
    if (tokens_.emplace(t.token, t).second) {
      issued.push_back(std::move(t));
    }
  }
  return issued;
}

std::variant<TokenStore::Grant, RedeemError> TokenStore::consume(std::string_view token,
                                                                 std::string_view device_community, Timestamp now) {
  auto normalized = normalize_token(token);
  if (!normalized) return RedeemError::kUnknownToken;
  std::lock_guard lock(mutex_);
  auto it = tokens_.find(*normalized);
  if (it == tokens_.end()) return RedeemError::kUnknownToken;
  CaseToken& t = it->second;
  if (t.consumed) return RedeemError::kAlreadyConsumed;
  if (now >= t.expires_at) return RedeemError::kExpired;
  const auto* authority = find_authority(t.authority);
  if (authority != nullptr && !authority->community.empty() && authority->community != device_community) {
    return RedeemError::kWrongCommunityScope;
  }
  t.consumed = true;
  return Grant{t.kind, t.authority};
}

std::vector<CaseToken> TokenStore::all() const {
  std::lock_guard lock(mutex_);
  std::vector<CaseToken> out;
  out.reserve(tokens_.size());
  for (const auto& [_, t] : tokens_) out.push_back(t);
  return out;
}

void TokenStore::restore(const CaseToken& token) {
  std::lock_guard lock(mutex_);
  tokens_.insert_or_assign(token.token, token);
}

std::size_t TokenStore::size() const {
  std::lock_guard lock(mutex_);
  return tokens_.size();
}

CaseReport make_report(Entropy& entropy, const DeviceId& device, CaseKind kind, std::optional<Date> symptom_start,
                       Timestamp now) {
  CaseReport r;
  r.case_id = "c" + random_hex(entropy, 16);
  r.device = device;
  r.kind = kind;
  if (kind == CaseKind::kPositive) r.symptom_start = symptom_start;
  r.reported_at = now;
  return r;
}

double amplification_probability(int n_tokens, double p_each) {
  if (n_tokens < 0 || !(p_each >= 0.0 && p_each <= 1.0)) {
    throw std::invalid_argument("amplification_probability: need n >= 0 and p in [0, 1]");
  }
  return 1.0 - std::pow(1.0 - p_each, n_tokens);
}

}  // namespace netdist
