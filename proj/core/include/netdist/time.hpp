#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace netdist {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
/// Signed span of seconds.
using Seconds = std::int64_t;

inline constexpr Seconds kMinute = 60;
inline constexpr Seconds kHour = 60 * kMinute;
inline constexpr Seconds kDay = 24 * kHour;

/// Calendar date (UTC), stored as days since 1970-01-01.
struct Date {
  std::int32_t days_since_epoch = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

Timestamp start_of(Date date);
Date date_of(Timestamp t);

/// `YYYY-MM-DDThh:mm:ssZ`
std::string format_timestamp(Timestamp t);
/// Accepts `YYYY-MM-DDThh:mm:ssZ`, `YYYY-MM-DDThh:mmZ` and a bare `YYYY-MM-DD`
/// (midnight). Throws std::invalid_argument on anything else.
Timestamp parse_timestamp(std::string_view text);

std::string format_date(Date date);
Date parse_date(std::string_view text);

}  // namespace netdist
