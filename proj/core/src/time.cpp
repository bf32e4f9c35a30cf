#include "netdist/time.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace netdist {

namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

Seconds floor_div(Seconds a, Seconds b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

Date make_date(int y, int m, int d, std::string_view text) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date: " + std::string(text));
  }
  return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

}  // namespace

Timestamp start_of(Date date) { return static_cast<Timestamp>(date.days_since_epoch) * kDay; }

Date date_of(Timestamp t) { return Date{static_cast<std::int32_t>(floor_div(t, kDay))}; }

std::string format_date(Date date) {
  const year_month_day ymd{sys_days{std::chrono::days{date.days_since_epoch}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  const Seconds secs = t - start_of(date_of(t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(secs / kHour),
                static_cast<int>(secs % kHour / kMinute), static_cast<int>(secs % kMinute));
  return format_date(date_of(t)) + buf;
}

Date parse_date(std::string_view text) {
  int y = 0;
  int m = 0;
  int d = 0;
  int consumed = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &m, &d, &consumed) != 3 ||
      consumed != static_cast<int>(s.size())) {
    throw std::invalid_argument("expected YYYY-MM-DD, got '" + s + "'");
  }
  return make_date(y, m, d, text);
}

Timestamp parse_timestamp(std::string_view text) {
  const std::string s(text);
  int y = 0;
  int mo = 0;
  int d = 0;
  int h = 0;
  int mi = 0;
  int sec = 0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &y, &mo, &d, &h, &mi, &sec, &consumed) == 6 &&
      consumed == static_cast<int>(s.size())) {
  } else if (consumed = 0, sec = 0,
             std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2dZ%n", &y, &mo, &d, &h, &mi, &consumed) == 5 &&
                 consumed == static_cast<int>(s.size())) {
  } else if (consumed = 0, h = mi = sec = 0,
             std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3 &&
                 consumed == static_cast<int>(s.size())) {
  } else {
    throw std::invalid_argument("expected ISO-8601 UTC timestamp, got '" + s + "'");
  }
  if (h > 23 || mi > 59 || sec > 60) {
    throw std::invalid_argument("time of day out of range: '" + s + "'");
  }
  return start_of(make_date(y, mo, d, text)) + h * kHour + mi * kMinute + sec;
}

}  // namespace netdist
