#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace roadcast::timeutil {

// Unix timestamps are seconds since 1970-01-01T00:00:00Z throughout.

/// Days since the Unix epoch for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& y, int& m, int& d);

/// Parse an ISO-8601 timestamp with an explicit UTC offset ("Z", "+HH:MM",
/// "-HHMM") into UTC seconds. A bare date "YYYY-MM-DD" means midnight UTC.
/// Fractional seconds are truncated. Returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601(const std::string& text);

/// Format as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(std::int64_t unix_sec);

/// Format as "YYYY-MM-DD".
std::string format_date(std::int64_t unix_sec);

/// Calendar month (1..12) of a UTC timestamp.
int utc_month(std::int64_t unix_sec);

/// Calendar year of a UTC timestamp.
int utc_year(std::int64_t unix_sec);

/// Unix seconds at midnight UTC of the given civil date.
std::int64_t unix_from_civil(int y, int m, int d);

}  // namespace roadcast::timeutil
