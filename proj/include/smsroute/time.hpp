#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace smsroute {

/// UTC instant with second precision.
using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM:SSZ`. Anything else yields nullopt.
std::optional<Timestamp> parse_iso8601(std::string_view text);

std::string format_iso8601(Timestamp t);

inline std::int64_t to_epoch(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

/// Fractional days elapsed from `earlier` to `later` (negative if reversed).
inline double days_between(Timestamp earlier, Timestamp later) {
  return static_cast<double>((later - earlier).count()) / 86400.0;
}

}  // namespace smsroute
