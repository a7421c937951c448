#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tero/error.hpp"

namespace tero {

// Calendar date with year-level, month-level or day-level resolution.
// Month and day are 0 when unknown; a known day implies a known month.
struct Date {
  std::int32_t year = 0;
  std::uint8_t month = 0;
  std::uint8_t day = 0;

  bool has_day() const { return day != 0; }
  bool has_month() const { return month != 0; }

  friend auto operator<=>(const Date&, const Date&) = default;
};

namespace detail {

inline bool all_hashes(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c != '#') return false;
  }
  return true;
}

inline bool contains_hash(std::string_view s) {
  return s.find('#') != std::string_view::npos;
}

template <class Int>
bool parse_digits(std::string_view s, Int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD`, where the year may carry a
// leading minus sign and any component may be a `#` placeholder.
// Returns nullopt when the year is unknown (which makes the whole date
// unknown); an unknown month forces an unknown day.
// Throws DataError on anything else.
inline std::optional<Date> parse_date(std::string_view text) {
  auto fail = [&]() -> DataError {
    return DataError("unparseable date '" + std::string(text) + "'");
  };
  std::string_view rest = text;
  bool negative = false;
  if (!rest.empty() && rest.front() == '-') {
    negative = true;
    rest.remove_prefix(1);
  }
  std::string_view parts[3];
  int n = 0;
  while (true) {
    if (n == 3) throw fail();
    auto dash = rest.find('-');
    parts[n++] = rest.substr(0, dash);
    if (dash == std::string_view::npos) break;
    rest.remove_prefix(dash + 1);
  }
  for (int i = 0; i < n; ++i) {
    if (parts[i].empty()) throw fail();
  }

  if (detail::contains_hash(parts[0])) {
    for (int i = 1; i < n; ++i) {
      if (!detail::all_hashes(parts[i])) throw fail();
    }
    for (char c : parts[0]) {
      if (c != '#' && (c < '0' || c > '9')) throw fail();
    }
    return std::nullopt;
  }

  std::int32_t year = 0;
  if (!detail::parse_digits(parts[0], year)) throw fail();
  Date d;
  d.year = negative ? -year : year;

  unsigned month = 0, day = 0;
  bool month_known = false;
  if (n >= 2) {
    if (detail::all_hashes(parts[1])) {
      if (n == 3 && !detail::all_hashes(parts[2])) throw fail();
    } else {
      if (parts[1].size() > 2 || !detail::parse_digits(parts[1], month)) throw fail();
      if (month < 1 || month > 12) throw fail();
      month_known = true;
    }
  }
  if (n == 3 && month_known && !detail::all_hashes(parts[2])) {
    if (parts[2].size() > 2 || !detail::parse_digits(parts[2], day)) throw fail();
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw fail();
  }
  d.month = static_cast<std::uint8_t>(month);
  d.day = static_cast<std::uint8_t>(day);
  return d;
}

// Canonical `YYYY-MM-DD` form with `##` for unknown components.
inline std::string format_date(const Date& d) {
  std::string out;
  std::string digits = std::to_string(d.year < 0 ? -static_cast<std::int64_t>(d.year) : d.year);
  if (d.year < 0) {
    out = "-" + digits;
  } else {
    out = std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
  }
  auto two = [](unsigned v) {
    return v == 0 ? std::string("##") : (v < 10 ? "0" : "") + std::to_string(v);
  };
  out += "-" + two(d.month) + "-" + two(d.day);
  return out;
}

inline std::string format_unknown_date() { return "####-##-##"; }

// Days since 1970-01-01 in the proleptic Gregorian calendar.
inline std::int64_t day_number(const Date& d) {
  if (!d.has_day()) {
    throw DataError("date " + format_date(d) + " lacks month/day resolution");
  }
  using namespace std::chrono;
  return sys_days{std::chrono::year{d.year} / std::chrono::month{d.month} / std::chrono::day{d.day}}
      .time_since_epoch()
      .count();
}

inline Date date_from_day_number(std::int64_t n) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{n}}};
  return Date{static_cast<std::int32_t>(int(ymd.year())), static_cast<std::uint8_t>(unsigned(ymd.month())),
              static_cast<std::uint8_t>(unsigned(ymd.day()))};
}

}  // namespace tero
