#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bikecast {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d);

// Parses "YYYY-MM-DD[T| ]HH:MM[:SS[.frac]][Z|+HH:MM|-HH:MM|+HHMM]" into Unix
// seconds. Fractional seconds truncate. Missing zone means UTC. Returns
// nullopt on malformed input or out-of-range fields.
std::optional<std::int64_t> parse_iso8601(std::string_view s);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_utc(std::int64_t t);

}  // namespace bikecast
