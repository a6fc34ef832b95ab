#pragma once

#include <string>
#include <string_view>

namespace wattbench {

/// Shortest decimal string that parses back to exactly the same double.
/// May use exponent notation for very large/small magnitudes.
std::string fmt_shortest(double v);

/// Decimal rendering with at most `sig` significant digits, never scientific
/// notation, trailing zeros trimmed. Used for report numbers.
std::string fmt_sig(double v, int sig = 6);

/// Fixed number of decimals (money columns).
std::string fmt_fixed(double v, int decimals);

/// Strict double parse of the whole string; throws DataError otherwise.
double parse_double(std::string_view s);

/// Filesystem-safe rendering of a plan name: anything outside
/// [A-Za-z0-9._-] becomes '-'. Empty input slugs to "unnamed".
std::string path_slug(std::string_view name);

/// FNV-1a 64-bit content digest as 16 hex digits. Used for artifact refs and
/// manifest fingerprints, not for anything adversarial.
std::string fnv1a64_hex(std::string_view bytes);

/// Strict integer parse; throws DataError otherwise.
long long parse_int(std::string_view s);

}  // namespace wattbench
