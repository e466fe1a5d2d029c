#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace abspm {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

constexpr double kMillisPerDay = 86'400'000.0;

Timestamp at_midnight(Date d);
Date date_of(Timestamp t);
Date add_days(Date d, long days);
long days_between(Date from, Date to);

/// Fractional days from `a` to `b`.
double days_between(Timestamp a, Timestamp b);

std::string format_iso_date(Date d);    // 2023-10-17
std::string format_dotted_date(Date d); // 17.10.2023

/// ISO-8601 with milliseconds and an explicit UTC offset, e.g.
/// 2023-10-17T00:00:00.000+00:00.
std::string format_iso_timestamp(Timestamp t);

/// Accepts YYYY-MM-DD or DD.MM.YYYY.
std::optional<Date> parse_date(std::string_view text);

/// Accepts YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM]. A missing offset
/// is read as UTC. The result is normalized to UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

}  // namespace abspm
