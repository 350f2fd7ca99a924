#include "trapline/timeutil.hpp"

#include <charconv>
#include <cstdio>

#include "trapline/error.hpp"

namespace trapline {

using namespace std::chrono;

namespace {

int digits(std::string_view text, std::size_t pos, std::size_t count) {
  int value = 0;
  if (pos + count > text.size()) return -1;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) return -1;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return -1;
  }
  return value;
}

Date make_date(int y, int m, int d, std::string_view text) {
  Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (y < 0 || m < 0 || d < 0 || !date.ok()) throw ParseError("invalid date '" + std::string(text) + "'");
  return date;
}

seconds make_clock(int h, int mi, int s, std::string_view text) {
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
    throw ParseError("invalid time '" + std::string(text) + "'");
  }
  return hours{h} + minutes{mi} + seconds{s};
}

// "YYYY-MM-DD?HH:MM:SS" where ? is the given separator.
seconds parse_date_time(std::string_view text, char separator, bool utc_suffix) {
  std::size_t expected = utc_suffix ? 20 : 19;
  if (text.size() != expected || text[4] != '-' || text[7] != '-' || text[10] != separator ||
      text[13] != ':' || text[16] != ':' || (utc_suffix && text[19] != 'Z')) {
    throw ParseError("invalid timestamp '" + std::string(text) + "'");
  }
  auto date = make_date(digits(text, 0, 4), digits(text, 5, 2), digits(text, 8, 2), text);
  auto clock = make_clock(digits(text, 11, 2), digits(text, 14, 2), digits(text, 17, 2), text);
  return sys_days{date}.time_since_epoch() + clock;
}

}  // namespace

LocalTime parse_local_time(std::string_view text) {
  return LocalTime{parse_date_time(text, ' ', false)};
}

std::string format_local_time(LocalTime t) {
  auto ymd = date_of(t);
  hh_mm_ss hms{time_of_day(t)};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                long(hms.minutes().count()), long(hms.seconds().count()));
  return buf;
}

std::string format_compact_date(Date d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
  return buf;
}

std::string format_compact_time(LocalTime t) {
  hh_mm_ss hms{time_of_day(t)};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02ld%02ld%02ld", long(hms.hours().count()),
                long(hms.minutes().count()), long(hms.seconds().count()));
  return buf;
}

Date parse_compact_date(std::string_view text) {
  if (text.size() != 8) throw ParseError("invalid date '" + std::string(text) + "'");
  return make_date(digits(text, 0, 4), digits(text, 4, 2), digits(text, 6, 2), text);
}

Date date_of(LocalTime t) { return Date{floor<days>(t)}; }

seconds time_of_day(LocalTime t) { return t - floor<days>(t); }

std::string format_utc(UtcTime t) {
  auto day_point = floor<days>(t);
  Date ymd{day_point};
  hh_mm_ss hms{t - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                long(hms.minutes().count()), long(hms.seconds().count()));
  return buf;
}

UtcTime parse_utc(std::string_view text) { return UtcTime{parse_date_time(text, 'T', true)}; }

UtcTime utc_now() { return floor<seconds>(system_clock::now()); }

}  // namespace trapline
