#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace trapline {

/// Wall-clock camera time; cameras carry no zone information.
using LocalTime = std::chrono::local_seconds;
/// Server-side bookkeeping time.
using UtcTime = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

/// `YYYY-MM-DD HH:MM:SS`; throws ParseError on anything else.
LocalTime parse_local_time(std::string_view text);
std::string format_local_time(LocalTime t);

/// `YYYYMMDD` / `HHMMSS` compact forms used in canonical names.
std::string format_compact_date(Date d);
std::string format_compact_time(LocalTime t);
Date parse_compact_date(std::string_view text);

Date date_of(LocalTime t);
std::chrono::seconds time_of_day(LocalTime t);

/// ISO-8601 UTC, e.g. `2021-03-14T09:15:05Z`.
std::string format_utc(UtcTime t);
UtcTime parse_utc(std::string_view text);
UtcTime utc_now();

}  // namespace trapline
