#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dynamo {

// Instants are UTC nanoseconds since the Unix epoch. int64 covers
// 1678..2262, which is plenty for sensor archives.
using Timestamp = std::int64_t;

inline constexpr Timestamp kNanosPerSecond = 1'000'000'000;

// Accepts ISO-8601 ("2015-10-01T18:32:54", optional fractional seconds up
// to ns, optional 'Z' or +hh:mm offset, 'T' or space separator) and plain
// epoch numbers. Epoch unit is autodetected by magnitude: s < 1e11 ns,
// then ms, us, ns. Returns nullopt when the field does not parse.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// ISO-8601 with nanosecond precision: 2015-10-01T18:32:54.000000000Z
std::string format_timestamp(Timestamp t);

// Shortest round-trip decimal for a double (std::to_chars); NaN -> "".
std::string format_value(double v);

// Exact inverse of format_value: "" (or "nan") -> NaN, otherwise
// from_chars. Returns nullopt for garbage.
std::optional<double> parse_value(std::string_view text);

}  // namespace dynamo
