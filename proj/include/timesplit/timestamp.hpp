#ifndef TIMESPLIT_TIMESTAMP_HPP
#define TIMESPLIT_TIMESTAMP_HPP

#include <array>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "timesplit/common.hpp"

namespace timesplit {

namespace detail {

// Civil calendar arithmetic (Howard Hinnant's algorithms).
inline int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct CivilDate {
  int64_t year;
  unsigned month;
  unsigned day;
};

inline CivilDate civil_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

inline bool leap_year(int64_t y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

inline unsigned days_in_month(int64_t y, unsigned m) {
  static constexpr std::array<unsigned, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                       31, 31, 30, 31, 30, 31};
  if (m == 2 && leap_year(y)) return 29;
  return lengths[m - 1];
}

} // namespace detail

/// A naive civil date-time: no time zone, second precision plus optional
/// fractional seconds.
struct Timestamp {
  int64_t day = 0;  // civil days since 1970-01-01
  int32_t sec = 0;  // second of day, [0, 86400)
  int32_t nano = 0; // [0, 1e9)

  auto operator<=>(const Timestamp&) const = default;

  double hour_of_day() const {
    return (static_cast<double>(sec) + static_cast<double>(nano) * 1e-9) / 3600.0;
  }
};

namespace detail {

struct TimestampFields {
  int64_t year = 1970;
  unsigned month = 1, dayofmonth = 1;
  int hour = 0, minute = 0, second = 0;
  int32_t nano = 0;
};

inline Timestamp to_timestamp(const TimestampFields& f, std::string_view context) {
  if (f.month < 1 || f.month > 12)
    throw ParseError(std::string(context) + ": month out of range");
  if (f.dayofmonth < 1 || f.dayofmonth > days_in_month(f.year, f.month))
    throw ParseError(std::string(context) + ": day of month out of range");
  if (f.hour < 0 || f.hour > 23) throw ParseError(std::string(context) + ": hour out of range");
  if (f.minute < 0 || f.minute > 59)
    throw ParseError(std::string(context) + ": minute out of range");
  if (f.second < 0 || f.second > 59)
    throw ParseError(std::string(context) + ": second out of range");
  Timestamp ts;
  ts.day = days_from_civil(f.year, f.month, f.dayofmonth);
  ts.sec = f.hour * 3600 + f.minute * 60 + f.second;
  ts.nano = f.nano;
  return ts;
}

inline bool read_digits(std::string_view s, size_t& pos, int width, int64_t& out) {
  if (pos + static_cast<size_t>(width) > s.size()) return false;
  int64_t v = 0;
  for (int i = 0; i < width; ++i) {
    char c = s[pos + static_cast<size_t>(i)];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += static_cast<size_t>(width);
  out = v;
  return true;
}

inline int32_t read_fraction(std::string_view s, size_t& pos) {
  // expects '.' at pos; consumes digits and returns nanoseconds
  ++pos;
  int64_t v = 0;
  int digits = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    if (digits < 9) {
      v = v * 10 + (s[pos] - '0');
      ++digits;
    }
    ++pos;
  }
  while (digits < 9) {
    v *= 10;
    ++digits;
  }
  return static_cast<int32_t>(v);
}

} // namespace detail

/// Parses a date-time against a strftime-like format supporting %Y %y %m %d
/// %H %M %S and literal characters. A fractional part directly after the
/// seconds field is accepted. The whole input must be consumed.
inline Timestamp parse_timestamp(std::string_view text, std::string_view format) {
  detail::TimestampFields f;
  size_t tp = 0;
  int64_t v = 0;
  for (size_t fp = 0; fp < format.size(); ++fp) {
    if (format[fp] != '%') {
      if (tp >= text.size() || text[tp] != format[fp])
        throw ParseError("timestamp '" + std::string(text) + "' does not match format '" +
                         std::string(format) + "'");
      ++tp;
      continue;
    }
    if (++fp >= format.size())
      throw ParseError("timestamp format ends with a bare '%'");
    bool ok = true;
    switch (format[fp]) {
      case 'Y': ok = detail::read_digits(text, tp, 4, v); f.year = v; break;
      case 'y': ok = detail::read_digits(text, tp, 2, v); f.year = 2000 + v; break;
      case 'm': ok = detail::read_digits(text, tp, 2, v); f.month = static_cast<unsigned>(v); break;
      case 'd': ok = detail::read_digits(text, tp, 2, v); f.dayofmonth = static_cast<unsigned>(v); break;
      case 'H': ok = detail::read_digits(text, tp, 2, v); f.hour = static_cast<int>(v); break;
      case 'M': ok = detail::read_digits(text, tp, 2, v); f.minute = static_cast<int>(v); break;
      case 'S':
        ok = detail::read_digits(text, tp, 2, v);
        f.second = static_cast<int>(v);
        if (ok && tp < text.size() && text[tp] == '.') f.nano = detail::read_fraction(text, tp);
        break;
      case '%':
        ok = tp < text.size() && text[tp] == '%';
        ++tp;
        break;
      default:
        throw ParseError(std::string("unsupported timestamp directive %") + format[fp]);
    }
    if (!ok)
      throw ParseError("timestamp '" + std::string(text) + "' does not match format '" +
                       std::string(format) + "'");
  }
  if (tp != text.size())
    throw ParseError("timestamp '" + std::string(text) + "' has trailing characters");
  return detail::to_timestamp(f, text);
}

inline constexpr std::string_view kDefaultTimestampFormat = "%Y-%m-%d %H:%M:%S";

/// ISO-8601 date-time with 'T' or ' ' separator; an optional zone suffix
/// (Z or +hh:mm) is accepted and ignored, timestamps being naive civil times.
inline Timestamp parse_iso8601(std::string_view text) {
  size_t tp = 0;
  detail::TimestampFields f;
  int64_t v = 0;
  auto expect = [&](char c) {
    if (tp >= text.size() || text[tp] != c)
      throw ParseError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
    ++tp;
  };
  auto digits = [&](int w) {
    if (!detail::read_digits(text, tp, w, v))
      throw ParseError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
    return v;
  };
  f.year = digits(4);
  expect('-');
  f.month = static_cast<unsigned>(digits(2));
  expect('-');
  f.dayofmonth = static_cast<unsigned>(digits(2));
  if (tp >= text.size() || (text[tp] != 'T' && text[tp] != ' '))
    throw ParseError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
  ++tp;
  f.hour = static_cast<int>(digits(2));
  expect(':');
  f.minute = static_cast<int>(digits(2));
  expect(':');
  f.second = static_cast<int>(digits(2));
  if (tp < text.size() && text[tp] == '.') f.nano = detail::read_fraction(text, tp);
  if (tp < text.size()) {
    if (text[tp] == 'Z') {
      ++tp;
    } else if (text[tp] == '+' || text[tp] == '-') {
      ++tp;
      digits(2);
      if (tp < text.size() && text[tp] == ':') ++tp;
      if (tp < text.size()) digits(2);
    }
  }
  if (tp != text.size())
    throw ParseError("invalid ISO-8601 timestamp '" + std::string(text) + "'");
  return detail::to_timestamp(f, text);
}

namespace detail {

inline void append_padded(std::string& out, int64_t value, int width) {
  char buf[20];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  int len = static_cast<int>(res.ptr - buf);
  for (int i = len; i < width; ++i) out.push_back('0');
  out.append(buf, res.ptr);
}

inline void append_fraction(std::string& out, int32_t nano) {
  if (nano == 0) return;
  out.push_back('.');
  char buf[10];
  for (int i = 8; i >= 0; --i) {
    buf[i] = static_cast<char>('0' + nano % 10);
    nano /= 10;
  }
  int len = 9;
  while (len > 1 && buf[len - 1] == '0') --len;
  out.append(buf, buf + len);
}

} // namespace detail

/// Renders a timestamp with the same directive set as parse_timestamp; a
/// nonzero fractional part is appended after %S.
inline std::string format_timestamp(const Timestamp& ts, std::string_view format) {
  auto date = detail::civil_from_days(ts.day);
  std::string out;
  for (size_t fp = 0; fp < format.size(); ++fp) {
    if (format[fp] != '%') {
      out.push_back(format[fp]);
      continue;
    }
    ++fp;
    switch (format[fp]) {
      case 'Y': detail::append_padded(out, date.year, 4); break;
      case 'y': detail::append_padded(out, date.year % 100, 2); break;
      case 'm': detail::append_padded(out, date.month, 2); break;
      case 'd': detail::append_padded(out, date.day, 2); break;
      case 'H': detail::append_padded(out, ts.sec / 3600, 2); break;
      case 'M': detail::append_padded(out, (ts.sec / 60) % 60, 2); break;
      case 'S':
        detail::append_padded(out, ts.sec % 60, 2);
        detail::append_fraction(out, ts.nano);
        break;
      case '%': out.push_back('%'); break;
      default:
        throw ValidationError(std::string("unsupported timestamp directive %") + format[fp]);
    }
  }
  return out;
}

inline std::string format_iso8601(const Timestamp& ts) {
  return format_timestamp(ts, "%Y-%m-%dT%H:%M:%S");
}

/// Date of the given civil day as YYYY-MM-DD.
inline std::string format_civil_day(int64_t day) {
  return format_timestamp(Timestamp{day, 0, 0}, "%Y-%m-%d");
}

/// Parses "HH:MM" or "HH:MM:SS" into a second-of-day offset.
inline int32_t parse_time_of_day(std::string_view text) {
  size_t tp = 0;
  int64_t h = 0, m = 0, s = 0;
  if (!detail::read_digits(text, tp, 2, h) || tp >= text.size() || text[tp] != ':')
    throw ParseError("invalid time of day '" + std::string(text) + "'");
  ++tp;
  if (!detail::read_digits(text, tp, 2, m))
    throw ParseError("invalid time of day '" + std::string(text) + "'");
  if (tp < text.size()) {
    if (text[tp] != ':' || !detail::read_digits(text, ++tp, 2, s) || tp != text.size())
      throw ParseError("invalid time of day '" + std::string(text) + "'");
  }
  if (h > 23 || m > 59 || s > 59)
    throw ParseError("time of day '" + std::string(text) + "' out of range");
  return static_cast<int32_t>(h * 3600 + m * 60 + s);
}

} // namespace timesplit

#endif // TIMESPLIT_TIMESTAMP_HPP
