#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/config.hpp"
#include "netdist/device_id.hpp"
#include "netdist/entropy.hpp"
#include "netdist/time.hpp"

namespace netdist {

enum class CaseKind { kPositive, kContact };

std::string_view to_string(CaseKind kind);
std::optional<CaseKind> parse_case_kind(std::string_view text);

/// One-time credential issued by a health authority. Carries no personal data.
struct CaseToken {
  /// 16 base32 characters grouped 4-4-4-4, e.g. `K7QF-2MZD-A4XR-P6WB`.
  std::string token;
  CaseKind kind = CaseKind::kPositive;
  std::string authority;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
  bool consumed = false;
};

/// Pseudonymous case record. Holds no reference to the token that created it.
struct CaseReport {
  std::string case_id;
  DeviceId device;
  CaseKind kind = CaseKind::kPositive;
  /// Absent for CONTACT reports.
  std::optional<Date> symptom_start;
  Timestamp reported_at = 0;
};

nlohmann::json to_json(const CaseToken& token);
CaseToken token_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CaseReport& report);
CaseReport report_from_json(const nlohmann::json& j);

/// Formats 10 random bytes as grouped base32.
std::string format_token(std::span<const std::uint8_t, 10> bytes);
/// Upper-cases, strips dashes and blanks, and regroups. nullopt if the result
/// is not 16 base32 characters.
std::optional<std::string> normalize_token(std::string_view text);

enum class RedeemError {
  kUnknownToken,
  kAlreadyConsumed,
  kExpired,
  kWrongCommunityScope,
  kUnknownDevice,
  kUnauthenticatedDisabled,
};
std::string_view to_string(RedeemError error);

class UnauthorizedAuthority : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Authority-issued tokens and their consumption state.
///
/// Redemption is linearizable per token: of any number of concurrent
/// attempts on one token, exactly one succeeds.
class TokenStore {
 public:
  struct Grant {
    CaseKind kind;
    std::string authority;
  };

  TokenStore(TokenConfig config, std::shared_ptr<Entropy> entropy);

  /// Throws UnauthorizedAuthority if the id/secret pair is not configured.
  std::vector<CaseToken> issue(std::string_view authority_id, std::string_view secret, CaseKind kind, int count,
                               Timestamp now);

  /// Marks the token consumed if it is valid for a device enrolled in
  /// `device_community` at `now`.
  std::variant<Grant, RedeemError> consume(std::string_view token, std::string_view device_community,
                                           Timestamp now);

  /// Sorted by token string, so the persisted form carries no issue or
  /// consumption order.
  std::vector<CaseToken> all() const;
  void restore(const CaseToken& token);
  std::size_t size() const;
  const TokenConfig& config() const { return config_; }

 private:
  const AuthorityConfig* find_authority(std::string_view id) const;

  TokenConfig config_;
  std::shared_ptr<Entropy> entropy_;
  mutable std::mutex mutex_;
  std::map<std::string, CaseToken, std::less<>> tokens_;
};

/// Builds a CaseReport with a fresh random case id.
CaseReport make_report(Entropy& entropy, const DeviceId& device, CaseKind kind, std::optional<Date> symptom_start,
                       Timestamp now);

/// Probability that at least one of `n_tokens` independent tokens, each
/// entered with probability `p_each`, is entered.
double amplification_probability(int n_tokens, double p_each);

}  // namespace netdist
