#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace cftv {

/// Simulation time in integer picoseconds.
using Time = std::int64_t;

inline constexpr Time kPicosecond = 1;
inline constexpr Time kNanosecond = 1'000;
inline constexpr Time kMicrosecond = 1'000'000;
inline constexpr Time kMillisecond = 1'000'000'000;
inline constexpr Time kSecond = 1'000'000'000'000;
inline constexpr Time kTimeMax = std::numeric_limits<Time>::max();

/// Parses "23 s", "100ms", "5 us", "7 ns", "12 ps" or a bare integer
/// (picoseconds). Decimal magnitudes such as "28.8 s" are accepted when
/// they resolve to a whole number of picoseconds. Throws BadParameter.
Time parse_time(std::string_view text);

/// Renders a time as seconds with the shortest exact decimal, e.g. "28.8 s".
std::string format_time(Time t);

}  // namespace cftv
